//! Weighted Bergman kernel of the punctured disk for radial weights of the
//! form `t²(1 + B·log t/t + A/t + κ(t))`, `t = −log|w|²`, raised to a large
//! power `k`.
//!
//! The crate computes the squared norms `J_a = ∫ h₀ᵏ(t) e^{−at} dt` of the
//! monomials `wᵃ` by peak-windowed adaptive quadrature in the log domain,
//! assembles the kernel `𝔅 = h₀^{k+1} Σ e^{−it}/J_i`, and verifies its
//! quantitative structure at large `k`: the shell peaks near `t = 2k/a`, the
//! interleaved gaps where the kernel collapses, the neck bounds for mid-range
//! modes, and the localization of individual modes to their shells.
//!
//! Everything of size `h₀ᵏ` lives in [`logdomain::LogReal`] or as a plain
//! natural log; no intermediate value ever leaves the representable range.

pub mod cli;
pub mod kernel;
pub mod logdomain;
pub mod oracle;
pub mod phgseries;
pub mod quadrature;
pub mod shells;
pub mod weight;

pub use kernel::{KernelContext, KernelValue};
pub use logdomain::LogReal;
pub use phgseries::{PhgSeries, PhgTerm};
pub use quadrature::QuadratureResult;
pub use shells::{GeometricPrefactor, ShellReport, ShellSpec};
pub use weight::ModelWeight;

/// Crate-wide error type.
///
/// Cloneable on purpose: kernel contexts cache fallible per-mode results and
/// hand the same outcome to every caller.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("peak search failed: {0}")]
    PeakSearch(String),
    #[error("quadrature tail bound not met: {0}")]
    TailBound(String),
    #[error("kernel truncation not certified: {0}")]
    Truncation(String),
    #[error("outside supported regime: {0}")]
    Regime(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI: 2 for configuration problems,
    /// 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Regime(_) | Error::InvalidSeries(_)
            | Error::InvalidWeight(_) => 2,
            Error::Domain(_) | Error::PeakSearch(_) | Error::TailBound(_)
            | Error::Truncation(_) => 3,
        }
    }
}
