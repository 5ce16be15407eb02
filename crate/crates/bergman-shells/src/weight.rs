//! The model weight `h₀(t) = t²(1 + B·log t/t + A/t + κ(t))`, the exponent
//! `g_a(t) = k·log h₀(t) − a·t` of the norm integrand, and its peak `t_a`.
//!
//! `A`, `B` and the correction series `κ` are user data; the overall
//! multiplicative constant of the weight is normalized to 1 because it
//! cancels in every ratio this crate reports.
//!
//! Derivatives of `g_a` are exact closed forms obtained by differentiating
//! the tail series analytically, not by numerical differencing — Newton
//! iterations at `t ~ 10⁵` need that.

use crate::phgseries::{expo, Expo, PhgSeries, DEFAULT_ORDER};
use crate::{Error, Result};

/// Intersection-number data of a boundary component: the complex dimension
/// `dim` of the ambient manifold and the ratio of intersection numbers
/// `[D]·K_D^{n−2} / K_D^{n−1}`.
#[derive(Clone, Copy, Debug)]
pub struct IntersectionData {
    pub dim: u32,
    pub ratio: f64,
}

/// The coefficient of `log t/t` in the weight expansion determined by the
/// boundary geometry: `4(n−1)/3 · ratio`.
pub fn log_term_coefficient(data: &IntersectionData) -> f64 {
    4.0 * f64::from(data.dim - 1) / 3.0 * data.ratio
}

/// Radial model weight; immutable after construction, safe to share.
#[derive(Clone, Debug)]
pub struct ModelWeight {
    coef_a: f64,
    coef_b: f64,
    kappa: PhgSeries,
    kappa_d1: PhgSeries,
    /// `P(t) = B log t/t + A/t + κ(t)`, so that `h₀ = t²(1 + P)`.
    tail: PhgSeries,
    tail_d1: PhgSeries,
    tail_d2: PhgSeries,
    t_min: f64,
}

impl ModelWeight {
    /// Builds a weight from `A`, `B` and a correction series `κ` whose
    /// exponents must lie in `(1, 6]`. Fails if `1 + P(t)` has no positive
    /// range on `[2, 10⁶]`; otherwise the largest sign change on that bracket
    /// (refined by bisection) becomes `t_min`, the lower edge of the domain
    /// of validity.
    pub fn new(coef_a: f64, coef_b: f64, kappa: PhgSeries) -> Result<Self> {
        if !coef_a.is_finite() || !coef_b.is_finite() {
            return Err(Error::InvalidWeight("A and B must be finite".into()));
        }
        if let Some(min) = kappa.min_expo() {
            if min <= Expo::from_integer(1) {
                return Err(Error::InvalidWeight(format!(
                    "kappa exponents must exceed 1, found {min}"
                )));
            }
        }
        if let Some(max) = kappa.max_expo() {
            if max > Expo::from_integer(6) {
                return Err(Error::InvalidWeight(format!(
                    "kappa exponents must not exceed 6, found {max}"
                )));
            }
        }
        let order = kappa.order().max(Expo::from_integer(DEFAULT_ORDER));
        let mut tail = PhgSeries::zero(order);
        if coef_b != 0.0 {
            tail = tail.add(&PhgSeries::monomial(coef_b, expo(1, 1), 1, order));
        }
        if coef_a != 0.0 {
            tail = tail.add(&PhgSeries::monomial(coef_a, expo(1, 1), 0, order));
        }
        for term in kappa.terms() {
            tail = tail.add(&PhgSeries::monomial(term.coeff, term.expo, term.logpow, order));
        }
        let tail_d1 = tail.derivative();
        let tail_d2 = tail_d1.derivative();
        let kappa_d1 = kappa.derivative();
        let t_min = positivity_floor(&tail)?;
        Ok(ModelWeight {
            coef_a,
            coef_b,
            kappa,
            kappa_d1,
            tail,
            tail_d1,
            tail_d2,
            t_min,
        })
    }

    /// The unperturbed weight `h₀ = t²`.
    pub fn pure() -> Self {
        ModelWeight::new(0.0, 0.0, PhgSeries::zero(Expo::from_integer(DEFAULT_ORDER)))
            .expect("pure weight is always valid")
    }

    pub fn coef_a(&self) -> f64 {
        self.coef_a
    }

    pub fn coef_b(&self) -> f64 {
        self.coef_b
    }

    pub fn kappa(&self) -> &PhgSeries {
        &self.kappa
    }

    /// Lower edge of the validity domain: `h₀ > 0` on `[t_min, ∞)`.
    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    /// `log h₀(t) = 2 log t + log(1 + P(t))`, with the inner log evaluated
    /// directly for accuracy.
    pub fn log_value(&self, t: f64) -> Result<f64> {
        let p = self.tail_at(t)?;
        if p <= -1.0 {
            return Err(Error::Domain(format!("weight not positive at t = {t}")));
        }
        Ok(2.0 * t.ln() + p.ln_1p())
    }

    fn tail_at(&self, t: f64) -> Result<f64> {
        if t < self.t_min {
            return Err(Error::Domain(format!(
                "t = {t} below weight domain edge t_min = {}",
                self.t_min
            )));
        }
        self.tail.evaluate(t)
    }

    /// `g_a(t) = k log h₀(t) − a t`, the log of the norm integrand.
    pub fn log_norm_integrand(&self, k: u64, a: f64, t: f64) -> Result<f64> {
        Ok(k as f64 * self.log_value(t)? - a * t)
    }

    /// Exact first derivative `g_a'(t) = 2k/t + k P'(t)/(1 + P(t)) − a`.
    pub fn log_norm_integrand_d1(&self, k: u64, a: f64, t: f64) -> Result<f64> {
        let p = self.tail_at(t)?;
        let p1 = self.tail_d1.evaluate(t)?;
        Ok(k as f64 * (2.0 / t + p1 / (1.0 + p)) - a)
    }

    /// Exact second derivative
    /// `g_a''(t) = −2k/t² + k (P''(1+P) − P'²)/(1+P)²`; independent of `a`,
    /// which is kept for signature symmetry with the lower derivatives.
    pub fn log_norm_integrand_d2(&self, k: u64, _a: f64, t: f64) -> Result<f64> {
        let p = self.tail_at(t)?;
        let p1 = self.tail_d1.evaluate(t)?;
        let p2 = self.tail_d2.evaluate(t)?;
        let u = 1.0 + p;
        Ok(k as f64 * (-2.0 / (t * t) + (p2 * u - p1 * p1) / (u * u)))
    }

    /// Locates the unique maximizer `t_a` of `g_a`: Newton from the initial
    /// guess `2k/a`, safeguarded by bisection on a bracket where `g_a'`
    /// changes sign. Converged when `|g_a'(t_a)| ≤ 1e−10·a`.
    ///
    /// Strict concavity of `g_a` makes the root unique; the peak may lie
    /// below `k^{1/3}` for large `a`, which the quadrature layer handles.
    pub fn find_peak(&self, k: u64, a: f64) -> Result<f64> {
        let kf = k as f64;
        let regime_cap = 2.0 * kf.sqrt() * kf.ln() + 1.0;
        if !(1.0..=regime_cap).contains(&a) {
            return Err(Error::Regime(format!(
                "peak search needs 1 <= a <= 2*sqrt(k)*log(k)+1, got a = {a} at k = {k}"
            )));
        }
        let floor = self.t_min * (1.0 + 1e-9);
        let guess = (2.0 * kf / a).max(floor);
        let tol = 1e-10 * a;

        let d1 = |t: f64| self.log_norm_integrand_d1(k, a, t);
        if d1(guess)?.abs() <= tol {
            return Ok(guess);
        }

        let mut lo = (kf / a).max(floor);
        let mut hi = (4.0 * kf / a).max(lo * 2.0);
        let mut g_lo = d1(lo)?;
        for _ in 0..60 {
            if g_lo > 0.0 || lo <= floor {
                break;
            }
            lo = (lo * 0.5).max(floor);
            g_lo = d1(lo)?;
        }
        let mut g_hi = d1(hi)?;
        for _ in 0..60 {
            if g_hi < 0.0 {
                break;
            }
            hi *= 2.0;
            g_hi = d1(hi)?;
        }
        if g_lo <= 0.0 || g_hi >= 0.0 {
            return Err(Error::PeakSearch(format!(
                "no sign change of g' on [{lo}, {hi}] for k = {k}, a = {a}"
            )));
        }

        let mut x = guess.clamp(lo, hi);
        for _ in 0..80 {
            let g1 = d1(x)?;
            if g1.abs() <= tol {
                return Ok(x);
            }
            if g1 > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let g2 = self.log_norm_integrand_d2(k, a, x)?;
            let newton = x - g1 / g2;
            x = if g2 < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(Error::PeakSearch(format!(
            "no convergence after 80 iterations (k = {k}, a = {a}); weight may be outside its validity regime"
        )))
    }

    /// Asymptotic expansion of the peak:
    /// `t_a ≈ 2k/a − (B/2) log(2k/a) + (B−A)/2 + (2k²/a²) κ'(2k/a)`.
    pub fn peak_asymptotic(&self, k: u64, a: f64) -> f64 {
        let kf = k as f64;
        let base = 2.0 * kf / a;
        let kappa_corr = if self.kappa.is_empty() {
            0.0
        } else {
            let d = self.kappa_d1.evaluate(base).unwrap_or(0.0);
            2.0 * kf * kf / (a * a) * d
        };
        base - 0.5 * self.coef_b * base.ln() + 0.5 * (self.coef_b - self.coef_a) + kappa_corr
    }
}

/// Largest zero crossing of `1 + P(t)` on `[2, 10⁶]`, refined by bisection;
/// 2 when the tail is positive on the whole bracket.
fn positivity_floor(tail: &PhgSeries) -> Result<f64> {
    const LO: f64 = 2.0;
    const HI: f64 = 1e6;
    const SAMPLES: usize = 4096;
    if tail.is_empty() {
        return Ok(LO);
    }
    let f = |t: f64| 1.0 + tail.evaluate(t).expect("t > 1 on the scan bracket");
    let grid = |j: usize| LO * (HI / LO).powf(j as f64 / SAMPLES as f64);
    if f(HI) <= 0.0 {
        return Err(Error::InvalidWeight(
            "weight is not positive at the top of the scan bracket".into(),
        ));
    }
    let mut last_crossing: Option<(f64, f64)> = None;
    let mut prev_t = grid(0);
    let mut prev_f = f(prev_t);
    for j in 1..=SAMPLES {
        let t = grid(j);
        let ft = f(t);
        if prev_f <= 0.0 && ft > 0.0 {
            last_crossing = Some((prev_t, t));
        }
        prev_t = t;
        prev_f = ft;
    }
    let (mut lo, mut hi) = match last_crossing {
        Some(bracket) => bracket,
        None => return Ok(LO),
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}
