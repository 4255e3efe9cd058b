//! `swdelay` command line.
//!
//! Exit codes: 0 success, 1 input error, 2 negative analysis result
//! (no certificate, subsystem not positive or not stable, ...).
//! Subsystem indices on the command line and in CSV output are 1-based.

pub mod model;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::lclf::{find_common_lclf, InfeasibleReason, LclfOutcome};
use crate::perturb::{apply, disturbance_norm, sample_disturbance};
use crate::radius::{
    radius_bounds_corollary5, radius_bounds_theorem2, radius_report_theorem3,
    subsystem_radius_positive, RadiusReport,
};
use crate::simulate::{decay_envelope_check, parallel_map, simulate, write_csv, SwitchingSignal};
use crate::{Disturbance, SwitchedDelaySystem};

pub use model::{DisturbanceFile, InputError, Model, SystemFile};

#[derive(Debug, Parser)]
#[command(
    name = "swdelay",
    version,
    about = "Stability analysis of switched time-delay systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a common linear copositive Lyapunov function
    Certify { path: PathBuf },
    /// Bounds on the structured stability radius
    #[command(group(ArgGroup::new("method").required(true).args(["theorem2", "theorem3", "corollary5"])))]
    Radius {
        path: PathBuf,
        /// LP margin over the structure gain; smallest subsystem radius
        #[arg(long)]
        theorem2: bool,
        /// Domination by the `bound` subsystem with `bound_structure`
        #[arg(long)]
        theorem3: bool,
        /// Unstructured bounds from the `bound` subsystem
        #[arg(long)]
        corollary5: bool,
    },
    /// Integrate the (optionally disturbed) system and write a CSV trajectory
    Simulate {
        path: PathBuf,
        /// constant:k | periodic:k1:d1,k2:d2,... | random:min,max,seed
        #[arg(long)]
        signal: String,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        dt: f64,
        /// const:v1,...,vn
        #[arg(long)]
        history: String,
        /// file:path | sample:norm,seed
        #[arg(long)]
        disturb: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radius of one positive subsystem under its own structure
    SubsystemRadius {
        path: PathBuf,
        /// 1-based subsystem index
        #[arg(long)]
        k: usize,
    },
    /// Sampled disturbances below the LP lower bound under random switching
    Sweep {
        path: PathBuf,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        signals: usize,
        /// Disturbance norm as a fraction of the lower bound
        #[arg(long, default_value_t = 0.99)]
        fraction: f64,
        #[arg(long, default_value_t = 30.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.005)]
        dt: f64,
        /// const:v1,...,vn (defaults to all ones)
        #[arg(long)]
        history: Option<String>,
        /// min,max dwell time
        #[arg(long, default_value = "0.5,3")]
        dwell: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Negative(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 1,
            Self::Negative(_) => 2,
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs the command, returns the exit code.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(&cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load(path: &Path) -> CliResult<Model> {
    Ok(SystemFile::read(path)?.to_model()?)
}

fn emit(out: &mut dyn Write, value: &serde_json::Value) -> CliResult<()> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(value).expect("json value")
    )?;
    Ok(())
}

fn execute(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    match cmd {
        Command::Certify { path } => certify(&load(path)?, out, err),
        Command::Radius {
            path,
            theorem2,
            theorem3,
            ..
        } => {
            let model = load(path)?;
            let report = if *theorem2 {
                let p = need(model.structure.as_ref(), "perturbation", "--theorem2")?;
                radius_bounds_theorem2(&model.system, p)?
            } else if *theorem3 {
                let p = need(model.structure.as_ref(), "perturbation", "--theorem3")?;
                let bound = need(model.bound.as_ref(), "bound", "--theorem3")?;
                let q = need(
                    model.bound_structure.as_ref(),
                    "bound_structure",
                    "--theorem3",
                )?;
                radius_report_theorem3(&model.system, p, bound, q)?
            } else {
                let bound = need(model.bound.as_ref(), "bound", "--corollary5")?;
                radius_bounds_corollary5(&model.system, bound)?
            };
            print_report(&report, out, err)?;
            Ok(0)
        }
        Command::Simulate {
            path,
            signal,
            horizon,
            dt,
            history,
            disturb,
            out: csv,
        } => {
            let model = load(path)?;
            let signal = parse_signal(signal, model.system.len())?;
            let phi = parse_history(history, model.system.dim())?;
            let sys = match disturb {
                Some(spec) => disturbed_system(&model, spec, path)?,
                None => model.system.clone(),
            };
            let traj = simulate(&sys, &|_| phi.clone(), &signal, *horizon, *dt)
                .map_err(|e| CliError::Input(e.to_string()))?;
            if let Some(csv) = csv {
                let file = std::fs::File::create(csv).map_err(|e| {
                    CliError::Input(format!("cannot create {}: {e}", csv.display()))
                })?;
                write_csv(&traj, std::io::BufWriter::new(file))?;
            }
            let envelope_ok = find_common_lclf(&sys)?
                .certificate()
                .map(|c| decay_envelope_check(&traj, c, traj.history_norm));
            emit(
                out,
                &json!({
                    "final_time": traj.times.last(),
                    "final_norm": traj.final_norm(),
                    "initial_norm": traj.initial_norm(),
                    "diverged": traj.diverged,
                    "envelope_ok": envelope_ok,
                    "steps": traj.len().saturating_sub(1),
                }),
            )?;
            writeln!(
                err,
                "final |x| = {:.4e}{}",
                traj.final_norm(),
                if traj.diverged { " (diverged)" } else { "" }
            )?;
            Ok(0)
        }
        Command::SubsystemRadius { path, k } => {
            let model = load(path)?;
            let p = need(model.structure.as_ref(), "perturbation", "subsystem-radius")?;
            if *k == 0 || *k > model.system.len() {
                return Err(CliError::Input(format!(
                    "--k must be in 1..={}, got {k}",
                    model.system.len()
                )));
            }
            let r = subsystem_radius_positive(model.system.subsystem(k - 1), p.quad(k - 1))
                .map_err(|e| match e {
                    Error::NotPositive | Error::NotStable(_) | Error::NegativeStructure => {
                        CliError::Negative(format!("subsystem {k}: {e}"))
                    }
                    other => other.into(),
                })?;
            emit(
                out,
                &json!({ "k": k, "lower": r.lower, "upper": r.upper, "exact": r.exact }),
            )?;
            writeln!(err, "subsystem {k}: {:.4} <= r <= {:.4}", r.lower, r.upper)?;
            Ok(0)
        }
        Command::Sweep {
            path,
            samples,
            signals,
            fraction,
            horizon,
            dt,
            history,
            dwell,
            seed,
            workers,
        } => {
            let model = load(path)?;
            let phi = match history {
                Some(h) => parse_history(h, model.system.dim())?,
                None => vec![1.0; model.system.dim()],
            };
            let (min_dwell, max_dwell) = parse_pair(dwell, "--dwell")?;
            let cfg = SweepConfig {
                samples: *samples,
                signals: *signals,
                fraction: *fraction,
                horizon: *horizon,
                dt: *dt,
                history: phi,
                min_dwell,
                max_dwell,
                seed: *seed,
                workers: *workers,
            };
            let report = sweep(&model, &cfg)?;
            emit(out, &serde_json::to_value(&report).expect("plain data"))?;
            writeln!(
                err,
                "lower bound {:.4}; {} runs, all decayed: {}",
                report.lower,
                report.runs.len(),
                report.all_decayed
            )?;
            Ok(0)
        }
    }
}

fn need<'a, T>(x: Option<&'a T>, section: &str, what: &str) -> CliResult<&'a T> {
    x.ok_or_else(|| {
        CliError::Input(format!(
            "{what} needs a `{section}` section in the system file"
        ))
    })
}

fn certify(model: &Model, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    match find_common_lclf(&model.system)? {
        LclfOutcome::Certified(c) => {
            emit(
                out,
                &json!({
                    "status": "certified",
                    "xi": c.xi,
                    "margin": c.margin,
                    "alpha": c.decay_alpha,
                    "M": c.envelope_gain,
                }),
            )?;
            writeln!(
                err,
                "certified: margin {:.4}, alpha {:.4}, M {:.4}",
                c.margin, c.decay_alpha, c.envelope_gain
            )?;
            Ok(0)
        }
        LclfOutcome::Infeasible(reason) => {
            let (detail, optimum) = match reason {
                InfeasibleReason::NoPositiveMargin { optimum } => ("no positive margin", optimum),
                InfeasibleReason::DegenerateCertificate { .. } => ("degenerate LP vertex", None),
            };
            emit(
                out,
                &json!({
                    "status": "infeasible",
                    "xi": null,
                    "margin": optimum,
                    "alpha": null,
                    "M": null,
                    "reason": detail,
                }),
            )?;
            writeln!(err, "no common copositive Lyapunov function: {detail}")?;
            Ok(2)
        }
    }
}

fn print_report(r: &RadiusReport, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    emit(
        out,
        &json!({
            "lower": r.lower,
            "upper": r.upper,
            "lower_method": r.lower_method,
            "upper_method": r.upper_method,
            "xi": r.certificate_xi,
        }),
    )?;
    let show = |v: Option<f64>| v.map_or("unavailable".to_string(), |v| format!("{v:.4}"));
    writeln!(
        err,
        "{} <= r <= {}  [{} / {}]",
        show(r.lower),
        show(r.upper),
        r.lower_method.tag(),
        r.upper_method.tag()
    )?;
    Ok(())
}

fn number(s: &str, what: &str) -> CliResult<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Input(format!("{what}: `{s}` is not a finite number")))
}

fn index(s: &str, modes: usize, what: &str) -> CliResult<usize> {
    match s.trim().parse::<usize>() {
        Ok(k) if (1..=modes).contains(&k) => Ok(k - 1),
        _ => Err(CliError::Input(format!(
            "{what}: subsystem `{s}` must be in 1..={modes}"
        ))),
    }
}

fn parse_pair(s: &str, what: &str) -> CliResult<(f64, f64)> {
    match s.split(',').collect::<Vec<_>>()[..] {
        [a, b] => Ok((number(a, what)?, number(b, what)?)),
        _ => Err(CliError::Input(format!(
            "{what}: expected `a,b`, got `{s}`"
        ))),
    }
}

/// `constant:k`, `periodic:k1:d1,k2:d2,...` or `random:min,max,seed`.
pub fn parse_signal(s: &str, modes: usize) -> CliResult<SwitchingSignal> {
    let bad = || CliError::Input(format!("--signal: cannot parse `{s}`"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "constant" => Ok(SwitchingSignal::Constant(index(rest, modes, "--signal")?)),
        "periodic" => {
            let schedule = rest
                .split(',')
                .map(|piece| {
                    let (k, d) = piece.split_once(':').ok_or_else(bad)?;
                    Ok((index(k, modes, "--signal")?, number(d, "--signal")?))
                })
                .collect::<CliResult<Vec<_>>>()?;
            Ok(SwitchingSignal::Periodic(schedule))
        }
        "random" => match rest.split(',').collect::<Vec<_>>()[..] {
            [lo, hi, seed] => Ok(SwitchingSignal::RandomDwell {
                min_dwell: number(lo, "--signal")?,
                max_dwell: number(hi, "--signal")?,
                seed: seed.trim().parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

/// `const:v1,...,vn`.
pub fn parse_history(s: &str, n: usize) -> CliResult<Vec<f64>> {
    let rest = s.strip_prefix("const:").ok_or_else(|| {
        CliError::Input(format!("--history: expected const:v1,...,vn, got `{s}`"))
    })?;
    let v = rest
        .split(',')
        .map(|x| number(x, "--history"))
        .collect::<CliResult<Vec<_>>>()?;
    if v.len() != n {
        return Err(CliError::Input(format!(
            "--history: {} values for dimension {n}",
            v.len()
        )));
    }
    Ok(v)
}

fn disturbed_system(
    model: &Model,
    spec: &str,
    system_path: &Path,
) -> CliResult<SwitchedDelaySystem> {
    let p = need(model.structure.as_ref(), "perturbation", "--disturb")?;
    let d: Disturbance = if let Some(rest) = spec.strip_prefix("sample:") {
        let (norm, seed) = rest.split_once(',').ok_or_else(|| {
            CliError::Input(format!(
                "--disturb: expected sample:norm,seed, got `{spec}`"
            ))
        })?;
        let seed = seed
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("--disturb: bad seed `{seed}`")))?;
        sample_disturbance(p, model.system.h(), number(norm, "--disturb")?, seed)?
    } else {
        let file = spec.strip_prefix("file:").unwrap_or(spec);
        let mut path = PathBuf::from(file);
        if path.is_relative() && !path.exists() {
            // fall back to the directory of the system file
            if let Some(dir) = system_path.parent() {
                path = dir.join(file);
            }
        }
        DisturbanceFile::read(&path)?.to_disturbance(p)?
    };
    Ok(apply(&model.system, p, &d)?)
}

/// Settings of [`sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub samples: usize,
    pub signals: usize,
    pub fraction: f64,
    pub horizon: f64,
    pub dt: f64,
    pub history: Vec<f64>,
    pub min_dwell: f64,
    pub max_dwell: f64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRun {
    pub sample: usize,
    pub signal: usize,
    pub disturbance_norm: f64,
    pub final_norm: f64,
    pub diverged: bool,
    /// `None` when the disturbed system could not be re-certified.
    pub envelope_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub lower: f64,
    pub runs: Vec<SweepRun>,
    /// Every run ended below `1e-4 · |φ|` with the envelope respected.
    pub all_decayed: bool,
}

/// Disturbances of norm `fraction · lower` (seeds `seed..seed+samples`) under
/// random dwell-time signals (seeds `seed..seed+signals`), run on
/// `workers` threads in a fixed order.
pub fn sweep(model: &Model, cfg: &SweepConfig) -> CliResult<SweepReport> {
    let p = need(model.structure.as_ref(), "perturbation", "sweep")?;
    let lower = radius_bounds_theorem2(&model.system, p)?
        .lower
        .ok_or_else(|| {
            CliError::Negative("no lower bound: the margin LP has no positive optimum".into())
        })?;
    let phi_norm = cfg.history.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let total = cfg.samples * cfg.signals;
    let runs = parallel_map(total, cfg.workers, |job| -> CliResult<SweepRun> {
        let (i, s) = (job / cfg.signals, job % cfg.signals);
        let d = sample_disturbance(
            p,
            model.system.h(),
            cfg.fraction * lower,
            cfg.seed + i as u64,
        )?;
        let sys = apply(&model.system, p, &d)?;
        let signal = SwitchingSignal::RandomDwell {
            min_dwell: cfg.min_dwell,
            max_dwell: cfg.max_dwell,
            seed: cfg.seed + s as u64,
        };
        let traj = simulate(&sys, &|_| cfg.history.clone(), &signal, cfg.horizon, cfg.dt)?;
        let envelope_ok = find_common_lclf(&sys)?
            .certificate()
            .map(|c| decay_envelope_check(&traj, c, traj.history_norm));
        Ok(SweepRun {
            sample: i,
            signal: s,
            disturbance_norm: disturbance_norm(&d),
            final_norm: traj.final_norm(),
            diverged: traj.diverged,
            envelope_ok,
        })
    })
    .into_iter()
    .collect::<CliResult<Vec<_>>>()?;
    let all_decayed = runs
        .iter()
        .all(|r| !r.diverged && r.final_norm < 1e-4 * phi_norm && r.envelope_ok == Some(true));
    Ok(SweepReport {
        lower,
        runs,
        all_decayed,
    })
}

/// Entry point used by the binary.
pub fn main_entry() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
