//! The `birkhoff` command-line front end.
//!
//! ```text
//! birkhoff integrate|check|convergence|reconstruct|compare [flags]
//! ```
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical step
//! failure, 3 failed check. Settings may also come from a `key = value` file
//! passed with `--config`; keys are the long flag names and flags win.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{compare, convergence_order, fill_residuals, rows_to_csv};
use crate::genscheme::{assemble_psi, coefficients};
use crate::oscillator::{
    closed_first_map, closed_second_map, coupled_oscillators, euler_center_map, exact_solution, DampedOscillator,
};
use crate::selfadjoint::{
    check_self_adjointness, reconstruct_b, reconstruct_f, sample_box, RawFirstOrderSystem, DEFAULT_QUAD_NODES,
};
use crate::stepper::{integrate, GeneratingStepper, OneStepMap, Trajectory};
use crate::transform::{AlphaTransform, ScaledCanonicalAlpha};
use crate::{BirkhoffSystem, Error, Matrix, PhasePoint, Vector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_STEP: i32 = 2;
pub const EXIT_CHECK: i32 = 3;

const DEFAULT_TAU_LIST: &str = "0.1,0.05,0.025,0.0125";

#[derive(Debug, Parser)]
#[command(
    name = "birkhoff",
    version,
    about = "K(z,t)-symplectic integration of Birkhoffian systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a built-in system and write the trajectory as CSV.
    Integrate(RunArgs),
    /// Check variational self-adjointness on random samples.
    Check(CheckArgs),
    /// Estimate the convergence order against the analytic solution.
    Convergence(ConvergenceArgs),
    /// Recover F and B at a point from the raw first-order system.
    Reconstruct(ReconstructArgs),
    /// Run every available scheme on one grid and tabulate errors and residuals.
    Compare(RunArgs),
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// key = value settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in system: damped-oscillator or coupled-oscillators.
    #[arg(long)]
    system: Option<String>,
    /// Damping coefficient ν.
    #[arg(long)]
    nu: Option<f64>,
    /// Adds perturb·r to D₂ of the damped oscillator.
    #[arg(long, allow_hyphen_values = true)]
    perturb: Option<f64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// generating-1, generating-2, closed-first, closed-second or euler-center.
    #[arg(long)]
    scheme: Option<String>,
    /// Initial state, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    tol: Option<f64>,
    /// Number of random sample points.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    /// Comma-separated, strictly decreasing step sizes.
    #[arg(long)]
    tau_list: Option<String>,
    /// Integration length T.
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Query point.
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    /// Query time.
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn io_failure(e: std::io::Error) -> Failure {
    Failure::config(format!("i/o error: {e}"))
}

#[derive(Debug, Default)]
struct ConfigFile(HashMap<String, String>);

impl ConfigFile {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn parse(text: &str) -> CliResult<Self> {
        let mut map = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Failure::config(format!("config line {}: expected key = value", i + 1)))?;
            map.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self(map))
    }

    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Failure::config(format!("config key {key}: cannot parse {raw:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SystemSel {
    DampedOscillator { nu: f64, perturb: f64 },
    CoupledOscillators { nu: f64 },
}

impl SystemSel {
    fn resolve(args: &SystemArgs, cfg: &ConfigFile) -> CliResult<Self> {
        let name = cfg
            .pick(args.system.clone(), "system")?
            .unwrap_or_else(|| "damped-oscillator".into());
        let nu = cfg.pick(args.nu, "nu")?.unwrap_or(0.5);
        let perturb = cfg.pick(args.perturb, "perturb")?.unwrap_or(0.0);
        if !nu.is_finite() || nu < 0.0 {
            return Err(Failure::config(format!(
                "--nu must be finite and non-negative, got {nu}"
            )));
        }
        if !perturb.is_finite() {
            return Err(Failure::config("--perturb must be finite"));
        }
        match name.as_str() {
            "damped-oscillator" => Ok(Self::DampedOscillator { nu, perturb }),
            "coupled-oscillators" if perturb == 0.0 => Ok(Self::CoupledOscillators { nu }),
            "coupled-oscillators" => Err(Failure::config("--perturb applies to damped-oscillator only")),
            other => Err(Failure::config(format!("unknown system {other:?}"))),
        }
    }

    fn nu(&self) -> f64 {
        match *self {
            Self::DampedOscillator { nu, .. } | Self::CoupledOscillators { nu } => nu,
        }
    }

    fn n(&self) -> usize {
        match self {
            Self::DampedOscillator { .. } => 1,
            Self::CoupledOscillators { .. } => 2,
        }
    }

    fn system(&self) -> BirkhoffSystem {
        match *self {
            Self::DampedOscillator { nu, .. } => DampedOscillator { nu }.system(),
            Self::CoupledOscillators { nu } => {
                coupled_oscillators(nu, coupled_stiffness()).expect("built-in stiffness is valid")
            }
        }
    }

    fn raw(&self) -> RawFirstOrderSystem {
        match *self {
            Self::DampedOscillator { nu, perturb } => DampedOscillator { nu }.raw(perturb),
            Self::CoupledOscillators { .. } => RawFirstOrderSystem::from_birkhoff(&self.system()),
        }
    }

    fn default_z0(&self) -> Vector {
        let mut z = Vector::zeros(2 * self.n());
        z[0] = 1.0;
        z
    }

    fn reference(&self, z0: &Vector, t0: f64) -> CliResult<impl Fn(f64) -> crate::Result<Vector> + Sync> {
        let nu = match *self {
            Self::DampedOscillator { nu, .. } => nu,
            Self::CoupledOscillators { .. } => {
                return Err(Failure::config("no analytic reference for coupled-oscillators"));
            }
        };
        if nu >= 2.0 {
            return Err(Failure::config("analytic reference needs ν < 2"));
        }
        let (r0, p0) = (z0[0], z0[1]);
        Ok(move |t: f64| {
            let (r, p) = exact_solution(nu, r0, p0, t - t0)?;
            Ok(Vector::from_vec(vec![r, p]))
        })
    }
}

fn coupled_stiffness() -> Matrix {
    Matrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SchemeSel {
    Generating(usize),
    ClosedFirst,
    ClosedSecond,
    EulerCenter,
}

impl FromStr for SchemeSel {
    type Err = Failure;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "generating-1" | "gen1" => Ok(Self::Generating(1)),
            "generating-2" | "gen2" => Ok(Self::Generating(2)),
            "closed-first" => Ok(Self::ClosedFirst),
            "closed-second" => Ok(Self::ClosedSecond),
            "euler-center" => Ok(Self::EulerCenter),
            other => Err(Failure::config(format!("unknown scheme {other:?}"))),
        }
    }
}

impl SchemeSel {
    fn name(&self) -> String {
        match self {
            Self::Generating(m) => format!("generating-{m}"),
            Self::ClosedFirst => "closed-first".into(),
            Self::ClosedSecond => "closed-second".into(),
            Self::EulerCenter => "euler-center".into(),
        }
    }

    fn build(&self, sel: &SystemSel, t0: f64) -> CliResult<Box<dyn OneStepMap>> {
        let nu = sel.nu();
        let closed_only = |map: Box<dyn OneStepMap>| match sel {
            SystemSel::DampedOscillator { .. } => Ok(map),
            _ => Err(Failure::config(format!(
                "scheme {} is only available for damped-oscillator",
                self.name()
            ))),
        };
        match *self {
            Self::Generating(m) => {
                let sys = sel.system();
                let alpha: Arc<dyn AlphaTransform> = Arc::new(
                    ScaledCanonicalAlpha::exponential(nu, sel.n()).map_err(|e| Failure::config(e.to_string()))?,
                );
                let cs = coefficients(&sys, alpha.clone(), t0, m).map_err(|e| Failure::config(e.to_string()))?;
                Ok(Box::new(GeneratingStepper::new(sys, assemble_psi(&cs, alpha))))
            }
            Self::ClosedFirst => closed_only(Box::new(closed_first_map(nu))),
            Self::ClosedSecond => closed_only(Box::new(closed_second_map(nu))),
            Self::EulerCenter => closed_only(Box::new(euler_center_map(nu))),
        }
    }
}

fn parse_vector(raw: &str, dim: usize, what: &str) -> CliResult<Vector> {
    let values: Vec<f64> = raw
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::config(format!("--{what}: expected comma-separated numbers, got {raw:?}")))?;
    if values.len() != dim {
        return Err(Failure::config(format!(
            "--{what}: expected {dim} values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::config(format!("--{what}: values must be finite")));
    }
    Ok(Vector::from_vec(values))
}

fn parse_list(raw: &str) -> CliResult<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::config(format!("--tau-list: cannot parse {s:?}")))
        })
        .collect()
}

/// Full-precision, locale-independent number formatting for CSV output.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.states[0].len();
    let mut out = String::from("step,t");
    for i in 1..=dim {
        let _ = write!(out, ",z{i}");
    }
    out.push_str(",residual\n");
    for (k, z) in traj.states.iter().enumerate() {
        let _ = write!(out, "{k},{}", num(traj.time(k)));
        for v in z.iter() {
            let _ = write!(out, ",{}", num(*v));
        }
        let residual = if k == 0 {
            String::new()
        } else {
            traj.residuals.get(k - 1).map(|r| num(*r)).unwrap_or_default()
        };
        let _ = writeln!(out, ",{residual}");
    }
    out
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(io_failure),
    }
}

fn positive(x: f64, flag: &str) -> CliResult<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Failure::config(format!("--{flag} must be positive, got {x}")))
    }
}

struct RunConfig {
    system: SystemSel,
    scheme: SchemeSel,
    z0: Vector,
    t0: f64,
    tau: f64,
    steps: usize,
    out: Option<PathBuf>,
}

impl RunConfig {
    fn resolve(args: RunArgs) -> CliResult<Self> {
        let cfg = ConfigFile::load(args.system.config.as_deref())?;
        let system = SystemSel::resolve(&args.system, &cfg)?;
        let scheme = cfg
            .pick(args.scheme, "scheme")?
            .unwrap_or_else(|| "generating-2".into())
            .parse()?;
        let z0 = match cfg.pick(args.z0, "z0")? {
            Some(raw) => parse_vector(&raw, 2 * system.n(), "z0")?,
            None => system.default_z0(),
        };
        let t0 = cfg.pick(args.t0, "t0")?.unwrap_or(0.0);
        if !t0.is_finite() {
            return Err(Failure::config("--t0 must be finite"));
        }
        let tau = positive(cfg.pick(args.tau, "tau")?.unwrap_or(0.01), "tau")?;
        let steps = cfg.pick(args.steps, "steps")?.unwrap_or(100);
        if steps == 0 {
            return Err(Failure::config("--steps must be at least 1"));
        }
        let out = cfg.pick(args.out, "out")?;
        Ok(Self {
            system,
            scheme,
            z0,
            t0,
            tau,
            steps,
            out,
        })
    }
}

fn cmd_integrate(args: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let cfg = RunConfig::resolve(args)?;
    let map = cfg.scheme.build(&cfg.system, cfg.t0)?;
    let sys = cfg.system.system();
    let (mut traj, failure) = match integrate(map.as_ref(), &cfg.z0, cfg.t0, cfg.tau, cfg.steps) {
        Ok(traj) => (traj, None),
        Err(e) => (e.partial, Some(format!("step {} failed: {}", e.step, e.source))),
    };
    let residual_failure = fill_residuals(&sys, map.as_ref(), &mut traj).err();
    emit(&trajectory_csv(&traj), cfg.out.as_deref(), out)?;
    if let Some(msg) = failure {
        let _ = writeln!(err, "error: {msg}");
        return Ok(EXIT_STEP);
    }
    if let Some(e) = residual_failure {
        let _ = writeln!(err, "error: residual evaluation failed: {e}");
        return Ok(EXIT_STEP);
    }
    Ok(EXIT_OK)
}

fn cmd_compare(args: RunArgs, out: &mut dyn Write) -> CliResult<i32> {
    let explicit = args.scheme.is_some();
    let cfg = RunConfig::resolve(args)?;
    let mut selections = vec![SchemeSel::Generating(1), SchemeSel::Generating(2)];
    if let SystemSel::DampedOscillator { .. } = cfg.system {
        selections.extend([SchemeSel::ClosedFirst, SchemeSel::ClosedSecond, SchemeSel::EulerCenter]);
    }
    if explicit {
        selections = vec![cfg.scheme];
    }
    let built = selections
        .iter()
        .map(|s| Ok((s.name(), s.build(&cfg.system, cfg.t0)?)))
        .collect::<CliResult<Vec<_>>>()?;
    let named: Vec<(&str, &dyn OneStepMap)> = built.iter().map(|(n, m)| (n.as_str(), m.as_ref())).collect();
    let sys = cfg.system.system();
    let reference = cfg.system.reference(&cfg.z0, cfg.t0).ok();
    let reference_dyn = reference
        .as_ref()
        .map(|r| r as &(dyn Fn(f64) -> crate::Result<Vector> + Sync));
    let rows = compare(&sys, &named, reference_dyn, &cfg.z0, cfg.t0, cfg.tau, cfg.steps);
    emit(&rows_to_csv(&rows), cfg.out.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn cmd_check(args: CheckArgs, out: &mut dyn Write) -> CliResult<i32> {
    let cfg = ConfigFile::load(args.system.config.as_deref())?;
    let system = SystemSel::resolve(&args.system, &cfg)?;
    let tol = cfg.pick(args.tol, "tol")?.unwrap_or(1e-7);
    if tol.is_nan() || tol < 0.0 {
        return Err(Failure::config("--tol must be non-negative"));
    }
    let count = cfg.pick(args.samples, "samples")?.unwrap_or(50);
    if count == 0 {
        return Err(Failure::config("--samples must be at least 1"));
    }
    let seed = cfg.pick(args.seed, "seed")?.unwrap_or(2024);
    let samples = sample_box(system.n(), count, 2.0, (0.0, 1.0), seed);
    let report = check_self_adjointness(&system.raw(), &samples, tol).map_err(|e| Failure::config(e.to_string()))?;
    let text = format!(
        "antisymmetry_violation = {:.5e}\nclosure_violation = {:.5e}\ntime_curl_violation = {:.5e}\npassed = {}\n",
        report.antisymmetry_violation, report.closure_violation, report.time_curl_violation, report.passed
    );
    out.write_all(text.as_bytes()).map_err(io_failure)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_CHECK })
}

fn cmd_convergence(args: ConvergenceArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let cfg = ConfigFile::load(args.system.config.as_deref())?;
    let system = SystemSel::resolve(&args.system, &cfg)?;
    let scheme: SchemeSel = cfg
        .pick(args.scheme, "scheme")?
        .unwrap_or_else(|| "generating-1".into())
        .parse()?;
    let z0 = match cfg.pick(args.z0, "z0")? {
        Some(raw) => parse_vector(&raw, 2 * system.n(), "z0")?,
        None => system.default_z0(),
    };
    let t0 = cfg.pick(args.t0, "t0")?.unwrap_or(0.0);
    let taus = parse_list(
        &cfg.pick(args.tau_list, "tau-list")?
            .unwrap_or_else(|| DEFAULT_TAU_LIST.into()),
    )?;
    if taus.len() < 3 {
        return Err(Failure::config("--tau-list needs at least three step sizes"));
    }
    for &tau in &taus {
        positive(tau, "tau-list")?;
    }
    let t_final = positive(cfg.pick(args.t_final, "t-final")?.unwrap_or(1.0), "t-final")?;
    let out_path = cfg.pick(args.out, "out")?;
    let reference = system.reference(&z0, t0)?;
    let map = scheme.build(&system, t0)?;
    let report = match convergence_order(map.as_ref(), &reference, &z0, t0, t_final, &taus) {
        Ok(r) => r,
        Err(e @ (Error::AtStep { .. } | Error::StepFailure { .. } | Error::Convergence { .. })) => {
            let _ = writeln!(err, "error: {e}");
            return Ok(EXIT_STEP);
        }
        Err(e) => return Err(Failure::config(e.to_string())),
    };
    let mut csv = String::from("tau,error\n");
    for (tau, e) in report.tau_values.iter().zip(&report.errors) {
        let _ = writeln!(csv, "{},{}", num(*tau), num(*e));
    }
    emit(&csv, out_path.as_deref(), out)?;
    writeln!(out, "slope = {:.3}", report.slope).map_err(io_failure)?;
    Ok(EXIT_OK)
}

fn cmd_reconstruct(args: ReconstructArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let cfg = ConfigFile::load(args.system.config.as_deref())?;
    let system = SystemSel::resolve(&args.system, &cfg)?;
    let z = match cfg.pick(args.z0, "z0")? {
        Some(raw) => parse_vector(&raw, 2 * system.n(), "z0")?,
        None => system.default_z0(),
    };
    let t = cfg.pick(args.t0, "t0")?.unwrap_or(0.0);
    let p = PhasePoint::new(z, t);
    let raw = system.raw();
    let f = reconstruct_f(&raw, &p, DEFAULT_QUAD_NODES).map_err(|e| Failure::config(e.to_string()))?;
    let f_text: Vec<String> = f.iter().map(|v| num(*v)).collect();
    writeln!(out, "F = {}", f_text.join(" ")).map_err(io_failure)?;
    match reconstruct_b(&raw, &p, DEFAULT_QUAD_NODES) {
        Ok(b) => {
            writeln!(out, "B = {}", num(b)).map_err(io_failure)?;
            Ok(EXIT_OK)
        }
        Err(e @ Error::Inconsistent { .. }) => {
            let _ = writeln!(err, "error: {e}");
            Ok(EXIT_CHECK)
        }
        Err(e) => Err(Failure::config(e.to_string())),
    }
}

/// Runs the CLI with the given arguments (including the program name) and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_CONFIG
                }
            };
        }
    };
    let result = match cli.command {
        Command::Integrate(a) => cmd_integrate(a, out, err),
        Command::Check(a) => cmd_check(a, out),
        Command::Convergence(a) => cmd_convergence(a, out, err),
        Command::Reconstruct(a) => cmd_reconstruct(a, out, err),
        Command::Compare(a) => cmd_compare(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let cfg = ConfigFile::parse("# comment\nnu = 0.25\ntau_list=0.1,0.05\n\n").unwrap();
        assert_eq!(cfg.pick::<f64>(None, "nu").unwrap(), Some(0.25));
        assert_eq!(cfg.pick::<f64>(Some(0.9), "nu").unwrap(), Some(0.9));
        assert_eq!(
            cfg.pick::<String>(None, "tau-list").unwrap().as_deref(),
            Some("0.1,0.05")
        );
        assert!(ConfigFile::parse("novalue").is_err());
        assert!(cfg.pick::<u64>(None, "nu").is_err());
    }

    #[test]
    fn vector_parsing() {
        assert_eq!(
            parse_vector("1, -2.5", 2, "z0").unwrap(),
            Vector::from_vec(vec![1.0, -2.5])
        );
        assert!(parse_vector("1", 2, "z0").is_err());
        assert!(parse_vector("1,x", 2, "z0").is_err());
        assert!(parse_vector("1,inf", 2, "z0").is_err());
    }

    #[test]
    fn csv_row_zero_has_empty_residual() {
        let mut traj = Trajectory::new(0.0, 0.5, Vector::from_vec(vec![1.0, 0.0]));
        traj.states.push(Vector::from_vec(vec![0.5, 0.25]));
        traj.residuals.push(1e-3);
        let csv = trajectory_csv(&traj);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,t,z1,z2,residual");
        assert!(lines[1].ends_with(','));
        assert_eq!(
            lines[2],
            "1,5.0000000000000000e-1,5.0000000000000000e-1,2.5000000000000000e-1,1.0000000000000000e-3"
        );
    }
}
