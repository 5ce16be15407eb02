//! Independent brute-force references used by the test suites and the
//! `verify --suite oracles` command: log-gamma via the Stirling series with
//! explicit remainder control, the exact pure-weight norm identity, and
//! exhaustive kernel summation with no adaptive truncation.
//!
//! None of these share a code path with the implementation they check:
//! different formulas, different summation orders.

use crate::kernel::KernelContext;
use crate::logdomain::LogReal;
use crate::{Error, Result};

/// Knobs for the oracle suite.
#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    /// Trapezoid resolution; at least 10⁴.
    pub points: u64,
    /// Stirling series depth; between 3 and 10.
    pub stirling_terms: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { points: 200_000, stirling_terms: 8 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points < 10_000 {
            return Err(Error::Config(format!("oracle points must be >= 10^4, got {}", self.points)));
        }
        if !(3..=10).contains(&self.stirling_terms) {
            return Err(Error::Config(format!(
                "stirling_terms must lie in [3, 10], got {}",
                self.stirling_terms
            )));
        }
        Ok(())
    }
}

/// `B_{2m} / (2m(2m−1))` for m = 1..=10, the Stirling series coefficients of
/// `x^{1−2m}`.
const STIRLING_COEFFS: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// Argument above which the truncated Stirling series is already far below
/// 1e−12 relative error for any depth ≥ 3.
const STIRLING_THRESHOLD: f64 = 30.0;

/// `log Γ(x)` for `x ≥ 1` to relative 1e−12: Stirling series for large
/// arguments, exact recursion `Γ(x+1) = x Γ(x)` to lift small ones.
pub fn log_gamma(x: f64) -> f64 {
    log_gamma_with(x, 8)
}

/// `log Γ(x)` with an explicit Stirling depth (3..=10).
pub fn log_gamma_with(x: f64, stirling_terms: u32) -> f64 {
    assert!(x >= 1.0, "log_gamma needs x >= 1, got {x}");
    let terms = stirling_terms.clamp(3, 10) as usize;
    let mut shift = 0.0f64;
    let mut y = x;
    while y < STIRLING_THRESHOLD {
        shift += y.ln();
        y += 1.0;
    }
    let mut series = 0.0f64;
    let y2 = y * y;
    let mut power = y;
    for c in STIRLING_COEFFS.iter().take(terms) {
        series += c / power;
        power *= y2;
    }
    (y - 0.5) * y.ln() - y + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

/// Exact pure-weight norm: for `h₀ = t²`,
/// `log J_a = log Γ(2k+1) − (2k+1) log a`, because the missing mass below
/// `k^{1/3}` is relatively below 1e−100 whenever `a·k^{1/3} ≤ k`.
pub fn pure_weight_norm_exact(k: u64, a: f64) -> Result<f64> {
    let kf = k as f64;
    if a * kf.cbrt() > kf {
        return Err(Error::Regime(format!(
            "pure-weight identity needs a*k^(1/3) <= k, got a = {a}, k = {k}"
        )));
    }
    Ok(log_gamma(2.0 * kf + 1.0) - (2.0 * kf + 1.0) * a.ln())
}

/// Kernel value by summing every mode `i ∈ [1, i_max]` in ascending order
/// with no adaptive truncation. Shares the cached norms with the context so
/// that the comparison isolates the summation strategy.
pub fn exhaustive_kernel(ctx: &KernelContext, t: f64) -> Result<f64> {
    let kf = ctx.k() as f64;
    if t < kf.cbrt() {
        return Err(Error::Domain(format!("t = {t} below k^(1/3) = {}", kf.cbrt())));
    }
    let base = (kf + 1.0) * ctx.weight().log_value(t)?;
    let mut terms = Vec::with_capacity(ctx.i_max() as usize);
    for i in 1..=ctx.i_max() {
        terms.push(LogReal::from_ln(-(i as f64) * t - ctx.log_j(i)?, true));
    }
    Ok(base + LogReal::sum(&terms).ln_abs())
}
