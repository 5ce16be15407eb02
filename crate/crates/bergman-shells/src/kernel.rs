//! The model kernel `𝔅_{k+1}(t) = h₀^{k+1}(t) Σ_{i≥1} e^{−it}/J_i`, its
//! from-below truncations, per-mode masses and the concave mode exponent.
//!
//! A [`KernelContext`] owns the `(k, weight)` pair and caches `log J_i` and
//! the peak `t_i` per mode. The per-term exponent `−it − log J_i` is strictly
//! concave in `i` (log-convexity of `J` in `i` by Cauchy-Schwarz), so at any
//! `t` the term sequence is unimodal: the sum is assembled by locating the
//! dominant mode, expanding outward until terms fall 90 natural-log units
//! below the maximum, and certifying the two discarded tails by geometric
//! series with the last included consecutive-term ratio.
//!
//! The index cutoff is `i_max = ⌈2√k·log k⌉`; the geometric certificate also
//! covers the modes beyond it, and any `t` where that certificate cannot be
//! produced is rejected with a diagnostic rather than silently extended.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::logdomain::LogReal;
use crate::quadrature::{log_norm_integral, QuadratureResult};
use crate::weight::ModelWeight;
use crate::{Error, Result};

/// Relative tolerance for every cached per-mode norm.
const NORM_REL_TOL: f64 = 1e-10;

/// Stop expanding the mode sum once the next exponent falls this far below
/// the dominant one; combined with the geometric tail certificate this keeps
/// the discarded mass below 1e−30 relative.
const DROP_LOG_UNITS: f64 = 90.0;

/// Hard ceiling on the certified relative truncation error.
const TRUNCATION_CAP: f64 = 1e-30;

#[derive(Clone, Copy, Debug)]
struct Mode {
    peak: f64,
    log_norm: f64,
}

type ModeCell = Arc<OnceLock<std::result::Result<Mode, Error>>>;

/// `(k, weight)` plus per-mode caches. Cache population is synchronized with
/// at-most-once computation per index; concurrent evaluations at distinct `t`
/// or distinct indices proceed independently.
pub struct KernelContext {
    k: u64,
    weight: ModelWeight,
    i_max: u64,
    modes: Mutex<HashMap<u64, ModeCell>>,
}

/// One kernel evaluation.
#[derive(Clone, Copy, Debug)]
pub struct KernelValue {
    /// `log 𝔅` (or of the truncated kernel).
    pub log_total: f64,
    /// Index of the largest per-mode term at this `t`.
    pub dominant_index: u64,
    /// Modes actually summed.
    pub terms_used: u64,
    /// Certified relative bound on everything discarded.
    pub truncation_rel_bound: f64,
}

impl KernelContext {
    /// `k` must lie in `[100, 10⁷]` and the weight must be positive from
    /// `k^{1/3}` on.
    pub fn new(k: u64, weight: ModelWeight) -> Result<Self> {
        if !(100..=10_000_000).contains(&k) {
            return Err(Error::Config(format!("k must lie in [100, 10^7], got {k}")));
        }
        let kf = k as f64;
        if weight.t_min() > kf.cbrt() {
            return Err(Error::InvalidWeight(format!(
                "weight positive only from t = {}, above k^(1/3) = {}",
                weight.t_min(),
                kf.cbrt()
            )));
        }
        let i_max = (2.0 * kf.sqrt() * kf.ln()).ceil() as u64;
        Ok(KernelContext { k, weight, i_max, modes: Mutex::new(HashMap::new()) })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn weight(&self) -> &ModelWeight {
        &self.weight
    }

    /// Index cutoff `⌈2√k·log k⌉`.
    pub fn i_max(&self) -> u64 {
        self.i_max
    }

    /// Lower edge of the kernel domain, `k^{1/3}`.
    pub fn t_lower(&self) -> f64 {
        (self.k as f64).cbrt()
    }

    fn mode(&self, i: u64) -> Result<Mode> {
        if !(1..=self.i_max).contains(&i) {
            return Err(Error::Regime(format!(
                "mode index {i} outside [1, {}]",
                self.i_max
            )));
        }
        let cell = {
            let mut map = self.modes.lock().expect("mode cache poisoned");
            Arc::clone(map.entry(i).or_default())
        };
        cell.get_or_init(|| {
            let peak = self.weight.find_peak(self.k, i as f64)?;
            let q: QuadratureResult = log_norm_integral(&self.weight, self.k, i as f64, NORM_REL_TOL)?;
            Ok(Mode { peak, log_norm: q.log_value })
        })
        .clone()
    }

    /// Cached `log J_i`.
    pub fn log_j(&self, i: u64) -> Result<f64> {
        Ok(self.mode(i)?.log_norm)
    }

    /// Cached peak `t_i` of mode `i`.
    pub fn peak(&self, i: u64) -> Result<f64> {
        Ok(self.mode(i)?.peak)
    }

    /// `log Λ_i(t) = k·log h₀(t) − i·t − log J_i`.
    pub fn log_mode_term(&self, i: u64, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.k as f64 * self.weight.log_value(t)? - (i as f64) * t - self.log_j(i)?)
    }

    /// The concave exponent `−i·t − log J_i` at real index `i ∈ [1, i_max]`.
    /// Integer indices hit the cache; fractional ones integrate directly.
    pub fn mode_exponent(&self, i: f64, t: f64) -> Result<f64> {
        Ok(-i * t - self.log_j_real(i)?)
    }

    fn log_j_real(&self, i: f64) -> Result<f64> {
        if !(1.0 <= i && i <= self.i_max as f64) {
            return Err(Error::Regime(format!(
                "real mode index {i} outside [1, {}]",
                self.i_max
            )));
        }
        if i.fract() == 0.0 {
            self.log_j(i as u64)
        } else {
            Ok(log_norm_integral(&self.weight, self.k, i, NORM_REL_TOL)?.log_value)
        }
    }

    /// Central second difference `[ι(i−h) − 2ι(i) + ι(i+h)] / h²`; the linear
    /// `t`-part of `ι` cancels exactly, so this is `−(d²/di²) log J_i`.
    pub fn mode_exponent_curvature(&self, i: f64, h: f64) -> Result<f64> {
        let a = self.log_j_real(i - h)?;
        let b = self.log_j_real(i)?;
        let c = self.log_j_real(i + h)?;
        Ok(-(a - 2.0 * b + c) / (h * h))
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let lower = self.t_lower();
        if t.is_nan() || t < lower {
            return Err(Error::Domain(format!(
                "kernel needs t >= k^(1/3) = {lower}, got {t}"
            )));
        }
        Ok(())
    }

    /// `log 𝔅_{k+1}(t)` with certified truncation.
    pub fn bergman(&self, t: f64) -> Result<KernelValue> {
        self.bergman_truncated(t, 1)
    }

    /// Kernel restricted to modes `i ≥ a`.
    pub fn bergman_truncated(&self, t: f64, a: u64) -> Result<KernelValue> {
        self.check_domain(t)?;
        if !(1..=self.i_max).contains(&a) {
            return Err(Error::Regime(format!(
                "truncation index {a} outside [1, {}]",
                self.i_max
            )));
        }
        let kf = self.k as f64;
        let base = (kf + 1.0) * self.weight.log_value(t)?;
        let exponent = |i: u64| -> Result<f64> { Ok(-(i as f64) * t - self.log_j(i)?) };

        // unimodality: walk uphill from the coarse estimate 2k/t
        let mut star = ((2.0 * kf / t).round() as i64).clamp(a as i64, self.i_max as i64) as u64;
        let mut e_star = exponent(star)?;
        loop {
            if star < self.i_max {
                let e_next = exponent(star + 1)?;
                if e_next > e_star {
                    star += 1;
                    e_star = e_next;
                    continue;
                }
            }
            if star > a {
                let e_prev = exponent(star - 1)?;
                if e_prev > e_star {
                    star -= 1;
                    e_star = e_prev;
                    continue;
                }
            }
            break;
        }

        let mut terms = vec![LogReal::ONE];
        let mut last_rel = 0.0f64; // exponent of the last included term, relative to the max
        let mut i = star;
        let right_edge = loop {
            if i == self.i_max {
                break None;
            }
            let rel = exponent(i + 1)? - e_star;
            if rel < -DROP_LOG_UNITS {
                break Some((rel, rel - last_rel));
            }
            terms.push(LogReal::from_ln(rel, true));
            last_rel = rel;
            i += 1;
        };
        let tail_right = match right_edge {
            // first excluded exponent x and the boundary step δ < 0:
            // Σ_{j≥0} e^{x + jδ} = e^x / (1 − e^δ)
            Some((x, step)) => geometric_tail(x, step)?,
            None if i > star => {
                // hit the index cap with terms still in play: certify the
                // modes beyond i_max from the last consecutive ratio
                let prev = exponent(i - 1)? - e_star;
                let step = last_rel - prev;
                geometric_tail(last_rel + step, step)?
            }
            None => {
                // dominant mode sits at the cap itself; no ratio to build a
                // certificate from
                return Err(Error::Truncation(format!(
                    "dominant mode at the index cap {} for t = {t}; tail beyond it cannot be certified",
                    self.i_max
                )));
            }
        };

        let mut last_rel_left = 0.0f64;
        let mut j = star;
        let left_edge = loop {
            if j == a {
                break None;
            }
            let rel = exponent(j - 1)? - e_star;
            if rel < -DROP_LOG_UNITS {
                break Some((rel, rel - last_rel_left));
            }
            terms.push(LogReal::from_ln(rel, true));
            last_rel_left = rel;
            j -= 1;
        };
        let tail_left = match left_edge {
            Some((x, step)) => geometric_tail(x, step)?,
            None => 0.0, // reached the truncation floor: nothing discarded
        };

        let sum = LogReal::sum(&terms);
        let log_sum = sum.ln_abs();
        let truncation_rel_bound = (tail_left + tail_right) / log_sum.exp();
        if truncation_rel_bound.is_nan() || truncation_rel_bound > TRUNCATION_CAP {
            return Err(Error::Truncation(format!(
                "certified tail {truncation_rel_bound:.3e} above {TRUNCATION_CAP:.0e} at t = {t} \
                 (dominant mode {star}, cap {}): kernel sum not trustworthy here",
                self.i_max
            )));
        }
        Ok(KernelValue {
            log_total: base + e_star + log_sum,
            dominant_index: star,
            terms_used: terms.len() as u64,
            truncation_rel_bound,
        })
    }

    /// Share of mode `a` in the kernel: `Λ_a(t)·h₀(t) / 𝔅_{k+1}(t) ∈ [0, 1]`.
    pub fn mode_fraction(&self, t: f64, a: u64) -> Result<f64> {
        let total = self.bergman(t)?;
        let mass = self.log_mode_density(t, a)?;
        Ok((mass - total.log_total).exp().min(1.0))
    }

    /// Absolute mass of mode `a`:
    /// `log [Λ_a(t)·h₀(t)] = (k+1)·log h₀(t) − a·t − log J_a`, the model
    /// kernel of the one-dimensional subspace spanned by `wᵃ`.
    pub fn log_mode_density(&self, t: f64, a: u64) -> Result<f64> {
        self.check_domain(t)?;
        Ok((self.k as f64 + 1.0) * self.weight.log_value(t)? - (a as f64) * t - self.log_j(a)?)
    }
}

/// Σ over the geometric envelope starting at relative exponent `x < 0` with
/// per-step decay `step < 0`: `e^x / (1 − e^step)`.
fn geometric_tail(x: f64, step: f64) -> Result<f64> {
    if step.is_nan() || step >= 0.0 {
        return Err(Error::Truncation(format!(
            "consecutive mode ratio not decaying (step = {step}); cannot certify tail"
        )));
    }
    Ok(x.exp() / (-step.exp_m1()))
}
