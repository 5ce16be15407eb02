//! Squared-norm integrals `J_a = ∫_{k^{1/3}}^{∞} h₀ᵏ(t) e^{−at} dt` by
//! peak-windowed adaptive Gauss-Legendre quadrature in the log domain, with
//! analytic tail certificates, plus the closed-form Laplace approximation and
//! a brute-force trapezoid reference.
//!
//! The domain of integration is `t ∈ (k^{1/3}, ∞)`: the model disk is the
//! region `t = −log|w|² > k^{1/3}`, and the change of variables `t = −log r²`
//! maps it there. Every evaluation of the integrand is done as
//! `g_a(t) − g_a(t_ref)` relative to the peak, so nothing ever overflows.
//!
//! Omitted tails are certified with the concave-envelope bound: for concave
//! `f` with `f'(x₀) < 0`, `∫_{x₀}^∞ e^f ≤ e^{f(x₀)}/(−f'(x₀))`, and the
//! mirror image of this on the left.

use crate::logdomain::LogReal;
use crate::weight::ModelWeight;
use crate::{Error, Result};

/// Result of an adaptive norm integral.
#[derive(Clone, Copy, Debug)]
pub struct QuadratureResult {
    /// `log J_a`.
    pub log_value: f64,
    /// Certified relative bound on the omitted tails; at most the requested
    /// tolerance on success.
    pub tail_bound_rel: f64,
    /// Number of integrand evaluations spent.
    pub evaluations: u64,
}

/// Tuning for [`log_norm_integral_with`].
#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Total relative error budget, split evenly between panel refinement
    /// and the two tail bounds.
    pub rel_tol: f64,
    /// Half-window in units of `√k·log k / a` around the peak.
    pub window_factor: f64,
}

impl IntegrateOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        IntegrateOptions { rel_tol, window_factor: 2.0 }
    }
}

/// 15-point Gauss-Legendre rule on [−1, 1].
#[allow(clippy::excessive_precision)]
const GL_NODES: [f64; 15] = [
    -0.9879925180204854285,
    -0.9372733924007059043,
    -0.8482065834104272162,
    -0.7244177313601700474,
    -0.5709721726085388475,
    -0.3941513470775633699,
    -0.2011940939974345223,
    0.0,
    0.2011940939974345223,
    0.3941513470775633699,
    0.5709721726085388475,
    0.7244177313601700474,
    0.8482065834104272162,
    0.9372733924007059043,
    0.9879925180204854285,
];
#[allow(clippy::excessive_precision)]
const GL_WEIGHTS: [f64; 15] = [
    0.03075324199611726835,
    0.07036604748810812471,
    0.1071592204671719350,
    0.1395706779261543144,
    0.1662692058169939336,
    0.1861610000155622110,
    0.1984314853271115765,
    0.2025782419255612729,
    0.1984314853271115765,
    0.1861610000155622110,
    0.1662692058169939336,
    0.1395706779261543144,
    0.1071592204671719350,
    0.07036604748810812471,
    0.03075324199611726835,
];

const INITIAL_PANELS: usize = 8;
const MAX_REFINEMENTS: usize = 15;

/// `log J_a` with relative error at most `rel_tol`.
pub fn log_norm_integral(w: &ModelWeight, k: u64, a: f64, rel_tol: f64) -> Result<QuadratureResult> {
    log_norm_integral_with(w, k, a, IntegrateOptions::with_rel_tol(rel_tol))
}

/// `log J_a` with explicit window control.
///
/// Locates the peak `t_a`, integrates `e^{g(t) − g(t_ref)}` over the window
/// `[t_a − W, t_a + W]`, `W = C·√k·log k/a`, by panel doubling until two
/// refinement levels agree to `rel_tol/2` in the log, then certifies both
/// omitted tails below `rel_tol/2` each. When the peak sits at or below
/// `k^{1/3}` the window starts at `k^{1/3}` and only the right tail exists.
pub fn log_norm_integral_with(
    w: &ModelWeight,
    k: u64,
    a: f64,
    opts: IntegrateOptions,
) -> Result<QuadratureResult> {
    if a.is_nan() || a < 1.0 {
        return Err(Error::Config(format!("norm integral needs a >= 1, got {a}")));
    }
    if !(1e-12..=1e-2).contains(&opts.rel_tol) {
        return Err(Error::Config(format!(
            "rel_tol must lie in [1e-12, 1e-2], got {}",
            opts.rel_tol
        )));
    }
    let kf = k as f64;
    let lower = kf.cbrt();
    if w.t_min() > lower {
        return Err(Error::Domain(format!(
            "weight domain edge t_min = {} exceeds k^(1/3) = {lower}",
            w.t_min()
        )));
    }
    let t_peak = w.find_peak(k, a)?;
    let window = opts.window_factor * kf.sqrt() * kf.ln() / a;
    let lo = (t_peak - window).max(lower);
    let hi = t_peak.max(lower) + window;
    let t_ref = t_peak.max(lower);
    let g_ref = w.log_norm_integrand(k, a, t_ref)?;

    let mut evaluations = 0u64;
    let mut prev_log: Option<f64> = None;
    let mut converged: Option<f64> = None;
    let mut panels = INITIAL_PANELS;
    for _ in 0..=MAX_REFINEMENTS {
        let mut panel_sums = Vec::with_capacity(panels);
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let left = lo + h * p as f64;
            let mid = left + 0.5 * h;
            let mut s = 0.0f64;
            let mut comp = 0.0f64;
            for (x, wgt) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                let t = mid + 0.5 * h * x;
                let v = wgt * (w.log_norm_integrand(k, a, t)? - g_ref).exp();
                let sum = s + v;
                comp += if s.abs() >= v.abs() { (s - sum) + v } else { (v - sum) + s };
                s = sum;
            }
            evaluations += 15;
            panel_sums.push(LogReal::from_value((s + comp) * 0.5 * h));
        }
        let total = LogReal::sum(&panel_sums);
        if total.is_zero() || total.sign() < 0 {
            return Err(Error::TailBound(format!(
                "window integral vanished for k = {k}, a = {a}"
            )));
        }
        let log_s = total.ln_abs();
        if let Some(prev) = prev_log {
            if (log_s - prev).abs() <= 0.5 * opts.rel_tol {
                converged = Some(log_s);
                break;
            }
        }
        prev_log = Some(log_s);
        panels *= 2;
    }
    let log_s = converged.ok_or_else(|| {
        Error::TailBound(format!(
            "panel refinement did not converge to rel_tol = {} for k = {k}, a = {a}",
            opts.rel_tol
        ))
    })?;

    // Concave-envelope certificates for the omitted tails, relative to the
    // window integral.
    let d_hi = w.log_norm_integrand_d1(k, a, hi)?;
    if d_hi >= 0.0 {
        return Err(Error::TailBound(format!(
            "integrand still rising at the window edge t = {hi}; window too small"
        )));
    }
    let right = ((w.log_norm_integrand(k, a, hi)? - g_ref) - log_s).exp() / (-d_hi);
    let left = if lo > lower * (1.0 + 1e-12) {
        let d_lo = w.log_norm_integrand_d1(k, a, lo)?;
        if d_lo <= 0.0 {
            return Err(Error::TailBound(format!(
                "integrand not rising at the left window edge t = {lo}; window too small"
            )));
        }
        ((w.log_norm_integrand(k, a, lo)? - g_ref) - log_s).exp() / d_lo
    } else {
        0.0
    };
    if !(right <= 0.5 * opts.rel_tol && left <= 0.5 * opts.rel_tol) {
        return Err(Error::TailBound(format!(
            "tail bounds {left:.3e} + {right:.3e} exceed rel_tol = {}; window too small",
            opts.rel_tol
        )));
    }

    Ok(QuadratureResult {
        log_value: g_ref + log_s,
        tail_bound_rel: left + right,
        evaluations,
    })
}

/// Closed-form Laplace approximation:
/// `log [ h₀ᵏ(t_a) e^{−a t_a} √(πk) · 2/a ]`.
pub fn log_norm_laplace(w: &ModelWeight, k: u64, a: f64) -> Result<f64> {
    let t_peak = w.find_peak(k, a)?;
    let kf = k as f64;
    Ok(w.log_norm_integrand(k, a, t_peak)? + 0.5 * (std::f64::consts::PI * kf).ln()
        + (2.0 / a).ln())
}

/// Composite-trapezoid reference over `[k^{1/3}, t_a + 3√k·log k/a]` with
/// log-domain summation. Test oracle; deliberately shares no code with the
/// adaptive path.
pub fn log_norm_trapezoid(w: &ModelWeight, k: u64, a: f64, points: u64) -> Result<f64> {
    if points < 10_000 {
        return Err(Error::Config(format!(
            "trapezoid oracle needs at least 10^4 points, got {points}"
        )));
    }
    let kf = k as f64;
    let lower = kf.cbrt();
    let t_peak = w.find_peak(k, a)?.max(lower);
    let hi = t_peak + 3.0 * kf.sqrt() * kf.ln() / a;
    let n = points as usize;
    let h = (hi - lower) / (n - 1) as f64;

    let mut logs = Vec::with_capacity(n);
    let mut g_max = f64::NEG_INFINITY;
    for j in 0..n {
        let t = lower + h * j as f64;
        let g = w.log_norm_integrand(k, a, t)?;
        if g > g_max {
            g_max = g;
        }
        logs.push(g);
    }
    let mut acc = 0.0f64;
    let mut comp = 0.0f64;
    for (j, g) in logs.iter().enumerate() {
        let mut v = (g - g_max).exp();
        if j == 0 || j == n - 1 {
            v *= 0.5;
        }
        let s = acc + v;
        comp += if acc.abs() >= v.abs() { (acc - s) + v } else { (v - s) + acc };
        acc = s;
    }
    Ok(g_max + (h * (acc + comp)).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::phgseries::{expo, PhgSeries};

    fn weighted(a: f64, b: f64) -> ModelWeight {
        ModelWeight::new(a, b, PhgSeries::zero(expo(6, 1))).unwrap()
    }

    #[test]
    fn pure_weight_matches_gamma_oracle() {
        let w = ModelWeight::pure();
        for a in 1..=3u32 {
            let got = log_norm_integral(&w, 200, f64::from(a), 1e-10).unwrap();
            let expect = oracle::log_gamma(401.0) - 401.0 * f64::from(a).ln();
            assert!(
                (got.log_value - expect).abs() <= 1e-8,
                "a = {a}: {} vs {expect}",
                got.log_value
            );
            assert!(got.tail_bound_rel <= 1e-10);
        }
    }

    #[test]
    fn self_consistent_across_tolerances() {
        let w = weighted(1.0, 2.0);
        let coarse = log_norm_integral(&w, 1000, 2.0, 1e-6).unwrap();
        let fine = log_norm_integral(&w, 1000, 2.0, 1e-10).unwrap();
        assert!((coarse.log_value - fine.log_value).abs() <= 2e-6);
    }

    #[test]
    fn window_factor_stability() {
        let w = weighted(1.0, 2.0);
        let c2 = log_norm_integral_with(
            &w,
            2000,
            1.0,
            IntegrateOptions { rel_tol: 1e-10, window_factor: 2.0 },
        )
        .unwrap();
        let c4 = log_norm_integral_with(
            &w,
            2000,
            1.0,
            IntegrateOptions { rel_tol: 1e-10, window_factor: 4.0 },
        )
        .unwrap();
        assert!((c2.log_value - c4.log_value).abs() <= 1e-10);
    }

    #[test]
    fn decreasing_in_a() {
        let w = weighted(1.0, 2.0);
        let mut prev = f64::INFINITY;
        for a in [1.0, 2.0, 4.0, 8.0] {
            let v = log_norm_integral(&w, 1000, a, 1e-9).unwrap().log_value;
            assert!(v < prev, "J must decrease in a");
            prev = v;
        }
    }

    #[test]
    fn laplace_tracks_adaptive_and_improves_in_k() {
        let w = ModelWeight::pure();
        let mut prev_err = f64::INFINITY;
        for k in [1000u64, 10_000, 100_000, 1_000_000] {
            let lap = log_norm_laplace(&w, k, 1.0).unwrap();
            let adp = log_norm_integral(&w, k, 1.0, 1e-10).unwrap().log_value;
            let err = ((lap - adp).exp() - 1.0).abs();
            let band = 5.0 * (k as f64).ln() / (k as f64).sqrt();
            assert!(err <= band, "k = {k}: |ratio-1| = {err}");
            assert!(err < prev_err, "ratio must improve monotonically in k");
            prev_err = err;
        }
    }

    #[test]
    fn laplace_pure_weight_scaling_identity() {
        // laplace(k, 2a) − laplace(k, a) = −(2k+1) ln 2 for the pure weight
        let w = ModelWeight::pure();
        let k = 5000u64;
        let l1 = log_norm_laplace(&w, k, 1.0).unwrap();
        let l2 = log_norm_laplace(&w, k, 2.0).unwrap();
        let expect = -(2.0 * k as f64 + 1.0) * 2f64.ln();
        assert!((l2 - l1 - expect).abs() < 1e-7, "{}", l2 - l1 - expect);
    }

    #[test]
    fn laplace_matches_stirling_form() {
        // For the pure weight, laplace_J = 2k log(2k/a) − 2k + ½ log(πk) + log(2/a),
        // which is log(Γ(2k+1)/a^{2k+1}) up to O(1/k) by Stirling.
        let w = ModelWeight::pure();
        let k = 10_000u64;
        let kf = k as f64;
        for a in [1.0, 3.0] {
            let lap = log_norm_laplace(&w, k, a).unwrap();
            let closed =
                2.0 * kf * (2.0 * kf / a).ln() - 2.0 * kf + 0.5 * (std::f64::consts::PI * kf).ln()
                    + (2.0 / a).ln();
            assert!((lap - closed).abs() < 1e-8);
            let stirling = oracle::log_gamma(2.0 * kf + 1.0) - (2.0 * kf + 1.0) * a.ln();
            assert!((lap - stirling).abs() <= 1.0 / kf * 10.0, "{}", lap - stirling);
        }
    }

    #[test]
    fn trapezoid_agrees_with_adaptive() {
        let w = weighted(1.0, 2.0);
        let adaptive = log_norm_integral(&w, 1000, 1.0, 1e-10).unwrap().log_value;
        let trap = log_norm_trapezoid(&w, 1000, 1.0, 1_000_000).unwrap();
        assert!((trap - adaptive).abs() <= 1e-8, "{}", trap - adaptive);
    }

    #[test]
    fn trapezoid_converges_with_points() {
        let w = weighted(1.0, 2.0);
        let reference = log_norm_integral(&w, 500, 1.0, 1e-10).unwrap().log_value;
        let errs: Vec<f64> = [10_000u64, 40_000, 160_000]
            .iter()
            .map(|&p| (log_norm_trapezoid(&w, 500, 1.0, p).unwrap() - reference).abs())
            .collect();
        assert!(errs[2] <= errs[0].max(1e-11), "errors {errs:?}");
        assert!(errs[2] <= 1e-8);
    }

    #[test]
    fn boundary_anchored_regime_for_large_a() {
        // peak below k^{1/3}: integral starts at the boundary, right tail only
        let w = weighted(1.0, 2.0);
        let k = 10_000u64;
        let a = 1200.0; // t_a ≈ 16.7 < k^{1/3} ≈ 21.5
        let peak = w.find_peak(k, a).unwrap();
        assert!(peak < (k as f64).cbrt());
        let r = log_norm_integral(&w, k, a, 1e-10).unwrap();
        assert!(r.tail_bound_rel <= 1e-10);
        // the trapezoid carries a genuine O(h²) boundary error here: the
        // integrand is a decaying exponential anchored at k^{1/3}, so its
        // derivative does not vanish at the edge
        let trap = log_norm_trapezoid(&w, k, a, 2_000_000).unwrap();
        assert!((trap - r.log_value).abs() <= 5e-8, "{}", trap - r.log_value);
    }

    #[test]
    fn rejects_bad_arguments() {
        let w = ModelWeight::pure();
        assert!(matches!(log_norm_integral(&w, 1000, 0.5, 1e-8), Err(Error::Config(_))));
        assert!(matches!(log_norm_integral(&w, 1000, 1.0, 1e-1), Err(Error::Config(_))));
        assert!(matches!(log_norm_trapezoid(&w, 1000, 1.0, 100), Err(Error::Config(_))));
    }
}
