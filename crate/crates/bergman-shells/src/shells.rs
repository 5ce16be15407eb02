//! Shell geometry and the quantitative verification suites: predicted shell
//! locations and peak values, the geometric prefactor mapping the model
//! kernel to a manifold density prediction, and pass/fail reports for the
//! shell, neck, subspace and localization statements.

use rayon::prelude::*;
use serde::Serialize;

use crate::kernel::KernelContext;
use crate::weight::ModelWeight;
use crate::{Error, Result};

/// Predicted location of the `a`-th shell and its adjacent gap.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShellSpec {
    pub a: u64,
    /// `2k/a − (B/2)·log(2k/a)`.
    pub tau_shell: f64,
    /// `tau_shell − k/(a(a+1))`.
    pub tau_gap: f64,
}

/// Thresholds for the shell checks. The asymptotic statements carry
/// unspecified constants; these are chosen to fail on implementation bugs
/// while passing the true asymptotics with headroom.
#[derive(Clone, Copy, Debug)]
pub struct ShellTolerances {
    /// Allowed |log(measured/predicted)| at the shell.
    pub shell_log_ratio: f64,
    /// Required log-units of suppression at the gap.
    pub gap_log_units: f64,
    /// Allowed |log ratio| between the shell point and `tau_shell ± 1`.
    pub plateau_log_ratio: f64,
}

impl Default for ShellTolerances {
    fn default() -> Self {
        ShellTolerances { shell_log_ratio: 0.2, gap_log_units: 100.0, plateau_log_ratio: 0.05 }
    }
}

/// Per-shell verification record.
#[derive(Clone, Copy, Debug)]
pub struct ShellReport {
    pub spec: ShellSpec,
    pub log_measured: f64,
    pub log_predicted: f64,
    /// `measured / predicted`, always positive.
    pub ratio: f64,
    /// `log(𝔅 at gap / 𝔅 at shell)`, expected deeply negative.
    pub log_gap_suppression: f64,
    pub dominant_index: u64,
    /// Worst |log ratio| over `tau_shell ± 1`.
    pub plateau_deviation: f64,
    pub pass_shell: bool,
    pub pass_gap: bool,
    pub pass_dominant: bool,
    pub pass_plateau: bool,
    pub pass: bool,
}

/// The factor `k^{n−1}/π^{n−1}` relating the fiber-wise model kernel to the
/// manifold density of states. Exposed as an explicit option because the
/// model-level statements are the unambiguous ones.
#[derive(Clone, Copy, Debug)]
pub struct GeometricPrefactor {
    pub n: u32,
    pub enabled: bool,
}

impl GeometricPrefactor {
    pub fn disabled() -> Self {
        GeometricPrefactor { n: 1, enabled: false }
    }
}

/// Shell and gap locations for mode `a`; the shell asymptotics hold for
/// `1 ≤ a ≤ √k/log k`.
pub fn shell_spec(w: &ModelWeight, k: u64, a: u64) -> Result<ShellSpec> {
    let kf = k as f64;
    let cap = kf.sqrt() / kf.ln();
    if a == 0 || (a as f64) > cap {
        return Err(Error::Regime(format!(
            "shell index must lie in [1, sqrt(k)/log(k)] = [1, {cap:.2}], got {a}"
        )));
    }
    let base = 2.0 * kf / a as f64;
    let tau_shell = base - 0.5 * w.coef_b() * base.ln();
    let tau_gap = tau_shell - kf / (a as f64 * (a as f64 + 1.0));
    Ok(ShellSpec { a, tau_shell, tau_gap })
}

/// Predicted log peak value `log(2k^{3/2}/(√π a))`.
pub fn predicted_peak(k: u64, a: u64) -> f64 {
    let kf = k as f64;
    2f64.ln() + 1.5 * kf.ln() - 0.5 * std::f64::consts::PI.ln() - (a as f64).ln()
}

/// Adds `(n−1)(log k − log π)` when enabled; identity otherwise.
pub fn apply_prefactor(p: &GeometricPrefactor, k: u64, log_b: f64) -> f64 {
    if p.enabled {
        log_b + f64::from(p.n - 1) * ((k as f64).ln() - std::f64::consts::PI.ln())
    } else {
        log_b
    }
}

/// Shell-by-shell verification: peak value against the prediction, gap
/// suppression, dominant mode identity, and the O(1) plateau around the
/// shell.
pub fn verify_inside(
    ctx: &KernelContext,
    a_list: &[u64],
    tol: &ShellTolerances,
) -> Result<Vec<ShellReport>> {
    let mut reports = a_list
        .par_iter()
        .map(|&a| -> Result<ShellReport> {
            let spec = shell_spec(ctx.weight(), ctx.k(), a)?;
            let shell = ctx.bergman(spec.tau_shell)?;
            let gap = ctx.bergman(spec.tau_gap)?;
            let plus = ctx.bergman(spec.tau_shell + 1.0)?;
            let minus = ctx.bergman(spec.tau_shell - 1.0)?;
            let log_predicted = predicted_peak(ctx.k(), a);
            let log_gap_suppression = gap.log_total - shell.log_total;
            let plateau_deviation = (plus.log_total - shell.log_total)
                .abs()
                .max((minus.log_total - shell.log_total).abs());
            let pass_shell = (shell.log_total - log_predicted).abs() <= tol.shell_log_ratio;
            let pass_gap = log_gap_suppression <= -tol.gap_log_units;
            let pass_dominant = shell.dominant_index == a;
            let pass_plateau = plateau_deviation <= tol.plateau_log_ratio;
            Ok(ShellReport {
                spec,
                log_measured: shell.log_total,
                log_predicted,
                ratio: (shell.log_total - log_predicted).exp(),
                log_gap_suppression,
                dominant_index: shell.dominant_index,
                plateau_deviation,
                pass_shell,
                pass_gap,
                pass_dominant,
                pass_plateau,
                pass: pass_shell && pass_gap && pass_dominant && pass_plateau,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by_key(|r| r.spec.a);
    Ok(reports)
}

/// Kernel drop from the deepest shell to `t₁ + √k·log k`.
#[derive(Clone, Copy, Debug)]
pub struct FarFieldReport {
    pub t1: f64,
    pub log_at_shell: f64,
    pub probe_t: f64,
    pub log_at_probe: f64,
    /// `log 𝔅(probe) − log 𝔅(t₁)`; the Gaussian envelope puts this near
    /// `−(log k)²/4`.
    pub drop: f64,
}

pub fn far_field(ctx: &KernelContext) -> Result<FarFieldReport> {
    let kf = ctx.k() as f64;
    let t1 = ctx.peak(1)?;
    let probe_t = t1 + kf.sqrt() * kf.ln();
    let log_at_shell = ctx.bergman(t1)?.log_total;
    let log_at_probe = ctx.bergman(probe_t)?.log_total;
    Ok(FarFieldReport { t1, log_at_shell, probe_t, log_at_probe, drop: log_at_probe - log_at_shell })
}

/// Neck verification record for one mid-regime mode.
#[derive(Clone, Copy, Debug)]
pub struct NeckReport {
    pub a: u64,
    pub t_peak: f64,
    pub log_measured: f64,
    /// `log(k√k/a)`.
    pub log_lower: f64,
    /// `log(4k + 2k√k/a)`.
    pub log_upper: f64,
    /// `log(4k + 3√k·t_a)`, the linear-in-τ form.
    pub log_linear: f64,
    pub pass: bool,
}

/// Checks `k√k/a < 𝔅(t_a) < 4k + 2k√k/a` and the linear-in-τ bound for
/// integer modes in the neck regime `(√k/log k, ⌈√k·log k⌉]` (closed at the
/// rounded-up top so the regime edge itself stays checkable).
pub fn verify_neck(ctx: &KernelContext, a_samples: &[u64]) -> Result<Vec<NeckReport>> {
    let kf = ctx.k() as f64;
    let lo = kf.sqrt() / kf.ln();
    let hi = (kf.sqrt() * kf.ln()).ceil();
    for &a in a_samples {
        if (a as f64) <= lo || (a as f64) > hi {
            return Err(Error::Regime(format!(
                "neck sample {a} outside (sqrt(k)/log k, ceil(sqrt(k)*log k)] = ({lo:.1}, {hi}]"
            )));
        }
    }
    let mut reports = a_samples
        .par_iter()
        .map(|&a| -> Result<NeckReport> {
            let af = a as f64;
            let t_peak = ctx.peak(a)?;
            let log_measured = ctx.bergman(t_peak)?.log_total;
            let log_lower = (kf * kf.sqrt() / af).ln();
            let log_upper = (4.0 * kf + 2.0 * kf * kf.sqrt() / af).ln();
            let log_linear = (4.0 * kf + 3.0 * kf.sqrt() * t_peak).ln();
            let pass =
                log_lower < log_measured && log_measured < log_upper && log_measured <= log_linear;
            Ok(NeckReport { a, t_peak, log_measured, log_lower, log_upper, log_linear, pass })
        })
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by_key(|r| r.a);
    Ok(reports)
}

#[derive(Clone, Copy, Debug)]
pub struct SubspacePoint {
    pub t: f64,
    /// `log(𝔅_{k+1,a+1}(t) / 𝔅_{k+1}(t))`.
    pub log_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct SubspaceReport {
    pub a: u64,
    pub points: Vec<SubspacePoint>,
    pub min_suppression: f64,
    pub pass: bool,
}

/// Suppression threshold for the truncated kernel over the shell region.
pub const SUBSPACE_LOG_UNITS: f64 = 50.0;

/// For each `a`, checks `log(𝔅_{k+1,a+1}/𝔅_{k+1}) ≤ −50` on a 20-point grid
/// over `[t_a − k/(2a²), t₁]`.
pub fn verify_subspace(ctx: &KernelContext, a_list: &[u64]) -> Result<Vec<SubspaceReport>> {
    let kf = ctx.k() as f64;
    let cap = kf.sqrt() / kf.ln();
    for &a in a_list {
        if a == 0 || (a as f64) > cap {
            return Err(Error::Regime(format!(
                "subspace index must lie in [1, sqrt(k)/log(k)] = [1, {cap:.2}], got {a}"
            )));
        }
    }
    let t1 = ctx.peak(1)?;
    let mut reports = a_list
        .par_iter()
        .map(|&a| -> Result<SubspaceReport> {
            let af = a as f64;
            let start = ctx.peak(a)? - kf / (2.0 * af * af);
            let points = (0..20)
                .into_par_iter()
                .map(|j| -> Result<SubspacePoint> {
                    let t = start + (t1 - start) * j as f64 / 19.0;
                    let full = ctx.bergman(t)?;
                    let tail = ctx.bergman_truncated(t, a + 1)?;
                    Ok(SubspacePoint { t, log_ratio: tail.log_total - full.log_total })
                })
                .collect::<Result<Vec<_>>>()?;
            let min_suppression =
                points.iter().map(|p| -p.log_ratio).fold(f64::INFINITY, f64::min);
            Ok(SubspaceReport { a, points, min_suppression, pass: min_suppression >= SUBSPACE_LOG_UNITS })
        })
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by_key(|r| r.a);
    Ok(reports)
}

/// One profile row; `tau` is identified with `t` at the model level.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileRow {
    pub t: f64,
    pub tau: f64,
    pub log_bergman: f64,
    pub dominant_index: u64,
    pub log_rho_pred: f64,
}

/// Grid evaluation; failed points are reported with their reason instead of
/// a row.
#[derive(Clone, Debug)]
pub enum ProfileEntry {
    Row(ProfileRow),
    Skipped { t: f64, reason: String },
}

pub fn profile(ctx: &KernelContext, grid: &[f64], pre: &GeometricPrefactor) -> Vec<ProfileEntry> {
    grid.par_iter()
        .map(|&t| match ctx.bergman(t) {
            Ok(v) => ProfileEntry::Row(ProfileRow {
                t,
                tau: t,
                log_bergman: v.log_total,
                dominant_index: v.dominant_index,
                log_rho_pred: apply_prefactor(pre, ctx.k(), v.log_total),
            }),
            Err(e) => ProfileEntry::Skipped { t, reason: e.to_string() },
        })
        .collect()
}
