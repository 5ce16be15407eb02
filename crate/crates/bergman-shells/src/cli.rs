//! Command-line surface: configure a weight, compute profiles and shell
//! reports, run verification suites, emit CSV/JSON.
//!
//! Output is a pure function of the configuration: no timestamps, no locale,
//! floats printed with 17 significant digits (CSV) or shortest round-trip
//! form (JSON). Exit codes: 0 ok, 1 verification failed, 2 bad configuration,
//! 3 numeric failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::kernel::KernelContext;
use crate::oracle;
use crate::phgseries::{expo, parse_expo, Expo, PhgSeries, PhgTerm};
use crate::quadrature;
use crate::shells::{self, GeometricPrefactor, ProfileEntry, ShellTolerances};
use crate::weight::ModelWeight;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "bergman-shells",
    about = "Weighted Bergman kernel of the punctured disk: profiles, shell reports and verification suites",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the kernel on a t-grid and emit CSV
    Profile(ProfileArgs),
    /// Emit per-shell JSON reports
    Shells(ShellsArgs),
    /// Run a verification suite and report pass/fail
    Verify(VerifyArgs),
    /// Print log J_a, the peak t_a and the Laplace comparison per mode
    Ja(JaArgs),
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Weight power k (number of sections), in [100, 10^7]
    #[arg(long)]
    k: Option<u64>,
    /// Coefficient of the 1/t term of the weight
    #[arg(long = "A", allow_hyphen_values = true)]
    coef_a: Option<f64>,
    /// Coefficient of the log t/t term of the weight
    #[arg(long = "B", allow_hyphen_values = true)]
    coef_b: Option<f64>,
    /// Correction series term: COEFF EXPO LOGPOW (EXPO as num/den); repeatable
    #[arg(long = "kappa-term", num_args = 3, value_names = ["COEFF", "EXPO", "LOGPOW"], action = clap::ArgAction::Append, allow_hyphen_values = true)]
    kappa_term: Vec<String>,
    /// Complex dimension entering the geometric prefactor k^{n-1}/pi^{n-1}
    #[arg(long)]
    n: Option<u32>,
    /// Apply the geometric prefactor to predicted densities
    #[arg(long)]
    prefactor: bool,
    /// Relative tolerance for norm integrals, in [1e-12, 1e-2]
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plain-text config file of `key = value` lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Grid start (must be at least k^{1/3})
    #[arg(long = "t-min")]
    t_min: Option<f64>,
    /// Grid end
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    points: Option<u64>,
}

#[derive(Args, Debug)]
struct ShellsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated shell indices, e.g. 1,2,3
    #[arg(long = "a-list")]
    a_list: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// One of: inside, neck, concentration, subspace, oracles, series
    #[arg(long)]
    suite: Option<String>,
    /// Comma-separated mode indices for suites that take them
    #[arg(long = "a-list")]
    a_list: Option<String>,
}

#[derive(Args, Debug)]
struct JaArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated mode indices
    #[arg(long = "a-list")]
    a_list: Option<String>,
}

/// Fully resolved configuration: flags override the config file, which
/// overrides defaults.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub k: u64,
    pub coef_a: f64,
    pub coef_b: f64,
    pub kappa: PhgSeries,
    pub n: u32,
    pub prefactor_enabled: bool,
    pub rel_tol: f64,
    pub out: Option<PathBuf>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: Option<u64>,
    pub a_list: Option<Vec<u64>>,
    pub suite: Option<String>,
}

#[derive(Default)]
struct FileConfig {
    k: Option<u64>,
    coef_a: Option<f64>,
    coef_b: Option<f64>,
    kappa_terms: Vec<PhgTerm>,
    n: Option<u32>,
    prefactor: Option<bool>,
    rel_tol: Option<f64>,
    out: Option<PathBuf>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    points: Option<u64>,
    a_list: Option<Vec<u64>>,
    suite: Option<String>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value '{value}' for key '{key}'")))
}

fn parse_a_list(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("bad a-list entry '{p}'")))
        })
        .collect()
}

fn parse_kappa_triple(fields: &[&str]) -> Result<PhgTerm> {
    if fields.len() != 3 {
        return Err(Error::Config(format!(
            "kappa-term needs COEFF EXPO LOGPOW, got '{}'",
            fields.join(" ")
        )));
    }
    let coeff: f64 = fields[0]
        .parse()
        .map_err(|_| Error::Config(format!("bad kappa coefficient '{}'", fields[0])))?;
    let e = parse_expo(fields[1]).map_err(|err| Error::Config(err.to_string()))?;
    let logpow: u32 = fields[2]
        .parse()
        .map_err(|_| Error::Config(format!("bad kappa log power '{}'", fields[2])))?;
    Ok(PhgTerm { expo: e, logpow, coeff })
}

fn parse_config_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = FileConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {} is not 'key = value': '{raw}'", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "k" => cfg.k = Some(parse_num(key, value)?),
            "A" => cfg.coef_a = Some(parse_num(key, value)?),
            "B" => cfg.coef_b = Some(parse_num(key, value)?),
            "n" => cfg.n = Some(parse_num(key, value)?),
            "prefactor" => {
                cfg.prefactor = Some(match value {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(Error::Config(format!("bad prefactor value '{value}'"))),
                })
            }
            "rel-tol" => cfg.rel_tol = Some(parse_num(key, value)?),
            "out" => cfg.out = Some(PathBuf::from(value)),
            "t-min" => cfg.t_min = Some(parse_num(key, value)?),
            "t-max" => cfg.t_max = Some(parse_num(key, value)?),
            "points" => cfg.points = Some(parse_num(key, value)?),
            "a-list" => cfg.a_list = Some(parse_a_list(value)?),
            "suite" => cfg.suite = Some(value.to_string()),
            "kappa-term" => {
                let fields: Vec<&str> = value.split_whitespace().collect();
                cfg.kappa_terms.push(parse_kappa_triple(&fields)?);
            }
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
    }
    Ok(cfg)
}

impl RunConfig {
    fn resolve(common: &CommonArgs) -> Result<RunConfig> {
        let file = match &common.config {
            Some(path) => parse_config_file(path)?,
            None => FileConfig::default(),
        };
        let mut kappa_terms = file.kappa_terms.clone();
        if !common.kappa_term.is_empty() {
            kappa_terms.clear(); // flags override the file wholesale
            for chunk in common.kappa_term.chunks(3) {
                let fields: Vec<&str> = chunk.iter().map(String::as_str).collect();
                kappa_terms.push(parse_kappa_triple(&fields)?);
            }
        }
        let max_expo = kappa_terms
            .iter()
            .map(|t| t.expo)
            .max()
            .unwrap_or_else(|| Expo::from_integer(0));
        let order = max_expo.max(expo(6, 1));
        let kappa = PhgSeries::from_terms(order, kappa_terms)
            .map_err(|e| Error::Config(e.to_string()))?;

        let cfg = RunConfig {
            k: common.k.or(file.k).unwrap_or(10_000),
            coef_a: common.coef_a.or(file.coef_a).unwrap_or(0.0),
            coef_b: common.coef_b.or(file.coef_b).unwrap_or(0.0),
            kappa,
            n: common.n.or(file.n).unwrap_or(1),
            prefactor_enabled: common.prefactor || file.prefactor.unwrap_or(false),
            rel_tol: common.rel_tol.or(file.rel_tol).unwrap_or(1e-10),
            out: common.out.clone().or(file.out),
            t_min: file.t_min,
            t_max: file.t_max,
            points: file.points,
            a_list: file.a_list,
            suite: file.suite,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(100..=10_000_000).contains(&self.k) {
            return Err(Error::Config(format!("k must lie in [100, 10^7], got {}", self.k)));
        }
        if !(1e-12..=1e-2).contains(&self.rel_tol) {
            return Err(Error::Config(format!(
                "rel-tol must lie in [1e-12, 1e-2], got {}",
                self.rel_tol
            )));
        }
        if self.n < 1 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        Ok(())
    }

    pub fn weight(&self) -> Result<ModelWeight> {
        ModelWeight::new(self.coef_a, self.coef_b, self.kappa.clone())
    }

    pub fn context(&self) -> Result<KernelContext> {
        KernelContext::new(self.k, self.weight()?)
    }

    pub fn prefactor(&self) -> GeometricPrefactor {
        GeometricPrefactor { n: self.n, enabled: self.prefactor_enabled }
    }
}

/// Entry point used by `main`; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Profile(args) => cmd_profile(&args),
        Command::Shells(args) => cmd_shells(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Ja(args) => cmd_ja(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_output(out: &Option<PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn float17(v: f64) -> String {
    format!("{v:.16e}")
}

// --- profile ---------------------------------------------------------------

fn cmd_profile(args: &ProfileArgs) -> Result<i32> {
    let cfg = RunConfig::resolve(&args.common)?;
    let t_min = args
        .t_min
        .or(cfg.t_min)
        .ok_or_else(|| Error::Config("profile needs --t-min".into()))?;
    let t_max = args
        .t_max
        .or(cfg.t_max)
        .ok_or_else(|| Error::Config("profile needs --t-max".into()))?;
    let points = args
        .points
        .or(cfg.points)
        .ok_or_else(|| Error::Config("profile needs --points".into()))?;
    let lower = (cfg.k as f64).cbrt();
    if t_min < lower {
        return Err(Error::Config(format!(
            "grid start {t_min} below the kernel domain edge k^(1/3) = {lower}"
        )));
    }
    if t_max < t_min {
        return Err(Error::Config(format!("grid end {t_max} below grid start {t_min}")));
    }
    let ctx = cfg.context()?;
    let grid: Vec<f64> = if points <= 1 {
        (points == 1).then_some(t_min).into_iter().collect()
    } else {
        (0..points)
            .map(|j| t_min + (t_max - t_min) * j as f64 / (points - 1) as f64)
            .collect()
    };
    let rows = shells::profile(&ctx, &grid, &cfg.prefactor());
    let mut csv = String::from("t,tau,log_bergman,dominant_index,log_rho_pred\n");
    for entry in &rows {
        match entry {
            ProfileEntry::Row(r) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    float17(r.t),
                    float17(r.tau),
                    float17(r.log_bergman),
                    r.dominant_index,
                    float17(r.log_rho_pred)
                );
            }
            ProfileEntry::Skipped { t, reason } => {
                eprintln!("skipping t = {t}: {reason}");
            }
        }
    }
    write_output(&cfg.out, &csv)?;
    Ok(0)
}

// --- shells ------------------------------------------------------------------

/// JSON shape required of shell reports.
#[derive(Serialize)]
struct JsonShellReport {
    a: u64,
    tau_shell: f64,
    tau_gap: f64,
    log_measured: f64,
    log_predicted: f64,
    log_gap_suppression: f64,
    pass: bool,
}

fn cmd_shells(args: &ShellsArgs) -> Result<i32> {
    let cfg = RunConfig::resolve(&args.common)?;
    let a_list = match &args.a_list {
        Some(s) => parse_a_list(s)?,
        None => cfg.a_list.clone().unwrap_or_else(|| vec![1, 2, 3]),
    };
    let ctx = cfg.context()?;
    // regime validation up front: out-of-regime indices are a config error
    for &a in &a_list {
        shells::shell_spec(ctx.weight(), cfg.k, a).map_err(|e| Error::Config(e.to_string()))?;
    }
    let reports = shells::verify_inside(&ctx, &a_list, &ShellTolerances::default())?;
    let json: Vec<JsonShellReport> = reports
        .iter()
        .map(|r| JsonShellReport {
            a: r.spec.a,
            tau_shell: r.spec.tau_shell,
            tau_gap: r.spec.tau_gap,
            log_measured: r.log_measured,
            log_predicted: r.log_predicted,
            log_gap_suppression: r.log_gap_suppression,
            pass: r.pass,
        })
        .collect();
    let body = serde_json::to_string_pretty(&json).expect("shell reports serialize") + "\n";
    write_output(&cfg.out, &body)?;
    Ok(0)
}

// --- verify ------------------------------------------------------------------

#[derive(Serialize)]
struct CheckRecord {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SuiteRecord {
    suite: String,
    pass: bool,
    checks: Vec<CheckRecord>,
}

fn check(name: impl Into<String>, value: f64, threshold: f64, pass: bool) -> CheckRecord {
    CheckRecord { name: name.into(), value, threshold, pass }
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let cfg = RunConfig::resolve(&args.common)?;
    let suite = args
        .suite
        .clone()
        .or(cfg.suite.clone())
        .ok_or_else(|| Error::Config("verify needs --suite".into()))?;
    let a_list = match &args.a_list {
        Some(s) => Some(parse_a_list(s)?),
        None => cfg.a_list.clone(),
    };
    let checks = match suite.as_str() {
        "inside" => suite_inside(&cfg, a_list)?,
        "neck" => suite_neck(&cfg, a_list)?,
        "concentration" => suite_concentration(&cfg, a_list)?,
        "subspace" => suite_subspace(&cfg, a_list)?,
        "oracles" => suite_oracles(&cfg)?,
        "series" => suite_series()?,
        other => return Err(Error::Config(format!("unknown suite '{other}'"))),
    };
    let pass = checks.iter().all(|c| c.pass);
    let mut table = format!("suite {suite}: {} checks\n", checks.len());
    for c in &checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let value = format!("{:.10e}", c.value);
        let threshold = format!("{:.3e}", c.threshold);
        let _ = writeln!(table, "{verdict} {:<44} value={value:<24} threshold={threshold}", c.name);
    }
    let _ = writeln!(table, "suite {suite}: {}", if pass { "PASS" } else { "FAIL" });
    print!("{table}");
    if cfg.out.is_some() {
        let record = SuiteRecord { suite: suite.clone(), pass, checks };
        let body = serde_json::to_string_pretty(&record).expect("suite record serializes") + "\n";
        write_output(&cfg.out, &body)?;
    }
    Ok(if pass { 0 } else { 1 })
}

fn suite_inside(cfg: &RunConfig, a_list: Option<Vec<u64>>) -> Result<Vec<CheckRecord>> {
    let ctx = cfg.context()?;
    let a_list = a_list.unwrap_or_else(|| vec![1, 2, 3]);
    let tol = ShellTolerances::default();
    let reports = shells::verify_inside(&ctx, &a_list, &tol)?;
    let mut checks = Vec::new();
    for r in &reports {
        let a = r.spec.a;
        checks.push(check(
            format!("shell[{a}] |log measured/predicted|"),
            (r.log_measured - r.log_predicted).abs(),
            tol.shell_log_ratio,
            r.pass_shell,
        ));
        checks.push(check(
            format!("shell[{a}] gap suppression"),
            r.log_gap_suppression,
            -tol.gap_log_units,
            r.pass_gap,
        ));
        checks.push(check(
            format!("shell[{a}] dominant mode"),
            r.dominant_index as f64,
            a as f64,
            r.pass_dominant,
        ));
        checks.push(check(
            format!("shell[{a}] plateau deviation"),
            r.plateau_deviation,
            tol.plateau_log_ratio,
            r.pass_plateau,
        ));
    }
    Ok(checks)
}

fn suite_neck(cfg: &RunConfig, a_list: Option<Vec<u64>>) -> Result<Vec<CheckRecord>> {
    let ctx = cfg.context()?;
    let a_list = a_list.unwrap_or_else(|| vec![150, 300, 900]);
    let reports = shells::verify_neck(&ctx, &a_list)?;
    let mut checks = Vec::new();
    for r in &reports {
        checks.push(check(
            format!("neck[{}] above k*sqrt(k)/a", r.a),
            r.log_measured,
            r.log_lower,
            r.log_measured > r.log_lower,
        ));
        checks.push(check(
            format!("neck[{}] below 4k+2k*sqrt(k)/a", r.a),
            r.log_measured,
            r.log_upper,
            r.log_measured < r.log_upper,
        ));
        checks.push(check(
            format!("neck[{}] below 4k+3*sqrt(k)*tau", r.a),
            r.log_measured,
            r.log_linear,
            r.log_measured <= r.log_linear,
        ));
    }
    Ok(checks)
}

fn suite_concentration(cfg: &RunConfig, a_list: Option<Vec<u64>>) -> Result<Vec<CheckRecord>> {
    let ctx = cfg.context()?;
    let a_list = a_list.unwrap_or_else(|| vec![1, 2, 3]);
    let kf = cfg.k as f64;
    let mut checks = Vec::new();
    for &a in &a_list {
        let ta = ctx.peak(a)?;
        let frac = ctx.mode_fraction(ta, a)?;
        checks.push(check(
            format!("mode[{a}] fraction at shell"),
            frac,
            1.0 - 1e-20,
            frac >= 1.0 - 1e-20,
        ));
        let probe = ta - 3.0 * kf.sqrt() * kf.ln() / a as f64;
        let mass = ctx.log_mode_density(probe, a)?;
        let threshold = 1e-20f64.ln();
        checks.push(check(
            format!("mode[{a}] log mass inside its shell"),
            mass,
            threshold,
            mass <= threshold,
        ));
    }
    Ok(checks)
}

fn suite_subspace(cfg: &RunConfig, a_list: Option<Vec<u64>>) -> Result<Vec<CheckRecord>> {
    let ctx = cfg.context()?;
    let a_list = a_list.unwrap_or_else(|| vec![1, 2, 3]);
    let reports = shells::verify_subspace(&ctx, &a_list)?;
    Ok(reports
        .iter()
        .map(|r| {
            check(
                format!("subspace[{}] min suppression over grid", r.a),
                r.min_suppression,
                shells::SUBSPACE_LOG_UNITS,
                r.pass,
            )
        })
        .collect())
}

fn suite_oracles(cfg: &RunConfig) -> Result<Vec<CheckRecord>> {
    let mut checks = Vec::new();
    // Stirling log-gamma against the functional equation
    for x in [10.0f64, 100.5] {
        let resid = (oracle::log_gamma(x + 1.0) - oracle::log_gamma(x) - x.ln()).abs();
        checks.push(check(
            format!("log_gamma functional equation at {x}"),
            resid,
            1e-12,
            resid <= 1e-12,
        ));
    }
    // adaptive quadrature against the exact pure-weight norm
    let pure = ModelWeight::pure();
    for a in 1..=5u32 {
        let adaptive =
            quadrature::log_norm_integral(&pure, cfg.k, f64::from(a), cfg.rel_tol.min(1e-8))?;
        let exact = oracle::pure_weight_norm_exact(cfg.k, f64::from(a))?;
        let resid = (adaptive.log_value - exact).abs();
        checks.push(check(
            format!("pure-weight norm a={a} vs gamma identity"),
            resid,
            1e-8,
            resid <= 1e-8,
        ));
    }
    // exhaustive summation against the adaptive kernel
    let w = cfg.weight()?;
    let ctx = KernelContext::new(500, w.clone())?;
    let mut worst = 0.0f64;
    let lo = 1.2 * 500f64.cbrt();
    let mut state = 0x0bad_5eed_u64;
    for _ in 0..10 {
        let u = uniform(&mut state);
        let t = lo * (2.2 * 500.0 / lo).powf(u);
        let fast = ctx.bergman(t)?.log_total;
        let full = oracle::exhaustive_kernel(&ctx, t)?;
        worst = worst.max((fast - full).abs());
    }
    checks.push(check("exhaustive vs adaptive kernel (k=500)", worst, 1e-12, worst <= 1e-12));
    // trapezoid reference against the adaptive integral
    let k_small = cfg.k.min(1000);
    let trap = quadrature::log_norm_trapezoid(&w, k_small, 1.0, oracle::OracleConfig::default().points)?;
    let adaptive = quadrature::log_norm_integral(&w, k_small, 1.0, 1e-10)?.log_value;
    let resid = (trap - adaptive).abs();
    checks.push(check(
        format!("trapezoid vs adaptive norm (k={k_small})"),
        resid,
        1e-8,
        resid <= 1e-8,
    ));
    Ok(checks)
}

fn suite_series() -> Result<Vec<CheckRecord>> {
    let order = expo(6, 1);
    let mut state = 0x005e_41e5_u64;
    let mut round_trip_worst = 0.0f64;
    for _ in 0..100 {
        let s = random_series(&mut state, 5, order);
        let e = s.log1p(order)?.exp(order)?;
        let residual = e.add(&PhgSeries::monomial(-1.0, expo(0, 1), 0, order).add(&s.neg()));
        for t in residual.terms() {
            round_trip_worst = round_trip_worst.max(t.coeff.abs());
        }
    }
    let mut shift_worst = 0.0f64;
    for _ in 0..50 {
        let s = random_series(&mut state, 4, order);
        let c1 = uniform(&mut state) - 0.5;
        let c2 = uniform(&mut state) - 0.5;
        let two = s.shift_substitute(c1, order).shift_substitute(c2, order);
        let one = s.shift_substitute(c1 + c2, order);
        for t in two.add(&one.neg()).terms() {
            shift_worst = shift_worst.max(t.coeff.abs());
        }
    }
    let mut text_failures = 0.0f64;
    for _ in 0..20 {
        let s = random_series(&mut state, 6, order);
        let back: PhgSeries = s.to_text().parse()?;
        if back != s {
            text_failures += 1.0;
        }
    }
    Ok(vec![
        check("exp(log1p) round-trip residual", round_trip_worst, 1e-12, round_trip_worst <= 1e-12),
        check("shift substitution additivity residual", shift_worst, 1e-12, shift_worst <= 1e-12),
        check("text round-trip failures", text_failures, 0.0, text_failures == 0.0),
    ])
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn uniform(state: &mut u64) -> f64 {
    (splitmix(state) >> 11) as f64 / (1u64 << 53) as f64
}

fn random_series(state: &mut u64, terms: usize, order: Expo) -> PhgSeries {
    let mut out = Vec::new();
    for _ in 0..terms {
        let num = 1 + (splitmix(state) % 7) as i64;
        let den = 1 + (splitmix(state) % 2) as i64;
        let logpow = (splitmix(state) % 3) as u32;
        let coeff = 2.0 * uniform(state) - 1.0;
        out.push(PhgTerm { expo: Expo::new(num, den), logpow, coeff });
    }
    PhgSeries::from_terms(order, out).expect("random terms are valid")
}

// --- ja ----------------------------------------------------------------------

fn cmd_ja(args: &JaArgs) -> Result<i32> {
    let cfg = RunConfig::resolve(&args.common)?;
    let a_list = match &args.a_list {
        Some(s) => parse_a_list(s)?,
        None => cfg.a_list.clone().unwrap_or_else(|| vec![1, 2, 3]),
    };
    let w = cfg.weight()?;
    let mut body = String::from("a,t_peak,log_j,log_j_laplace,laplace_over_adaptive\n");
    for &a in &a_list {
        let af = a as f64;
        let peak = w.find_peak(cfg.k, af)?;
        let adaptive = quadrature::log_norm_integral(&w, cfg.k, af, cfg.rel_tol)?;
        let laplace = quadrature::log_norm_laplace(&w, cfg.k, af)?;
        let _ = writeln!(
            body,
            "{a},{},{},{},{}",
            float17(peak),
            float17(adaptive.log_value),
            float17(laplace),
            float17((laplace - adaptive.log_value).exp())
        );
    }
    write_output(&cfg.out, &body)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_list_parsing() {
        assert_eq!(parse_a_list("1,2,3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_a_list(" ").unwrap(), Vec::<u64>::new());
        assert!(parse_a_list("1,x").is_err());
    }

    #[test]
    fn config_file_round_trip() {
        let dir = std::env::temp_dir().join("bergman-shells-cli-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("weight.conf");
        std::fs::write(
            &path,
            "# sample\nk = 500\nA = 1.5\nB = -2\nkappa-term = 0.3 3/2 0\nkappa-term = -0.05 2 1\nprefactor = true\nn = 2\na-list = 1,2\n",
        )
        .unwrap();
        let common = CommonArgs { config: Some(path), ..Default::default() };
        let cfg = RunConfig::resolve(&common).unwrap();
        assert_eq!(cfg.k, 500);
        assert_eq!(cfg.coef_a, 1.5);
        assert_eq!(cfg.coef_b, -2.0);
        assert_eq!(cfg.kappa.len(), 2);
        assert!(cfg.prefactor_enabled);
        assert_eq!(cfg.n, 2);
        assert_eq!(cfg.a_list, Some(vec![1, 2]));
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join("bergman-shells-cli-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("weight.conf");
        std::fs::write(&path, "k = 500\nA = 1.5\n").unwrap();
        let common = CommonArgs {
            k: Some(1000),
            config: Some(path),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&common).unwrap();
        assert_eq!(cfg.k, 1000);
        assert_eq!(cfg.coef_a, 1.5);
    }

    #[test]
    fn validation_rejects_bad_values() {
        let common = CommonArgs { k: Some(10), ..Default::default() };
        assert!(RunConfig::resolve(&common).is_err());
        let common = CommonArgs { rel_tol: Some(0.5), ..Default::default() };
        assert!(RunConfig::resolve(&common).is_err());
        let common = CommonArgs { n: Some(0), ..Default::default() };
        assert!(RunConfig::resolve(&common).is_err());
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = std::env::temp_dir().join("bergman-shells-cli-test3");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.conf");
        std::fs::write(&path, "frobnicate = 7\n").unwrap();
        let common = CommonArgs { config: Some(path), ..Default::default() };
        assert!(matches!(RunConfig::resolve(&common), Err(Error::Config(_))));
    }
}
