//! `ioncollect`: cavity and mirror collection studies from JSON design files.
//!
//! Exit status: 0 on success, 1 for bad input (file, key, flag), 2 when a
//! computation fails.

mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use ioncollect::cavity::CavityConfig;
use ioncollect::dipole::TransitionKind;
use ioncollect::mirror::SweepAxis;
use ioncollect::{Error, Execution};

use commands::Env;
use config::{load, parse_override, InputError, MirrorConfig, ScaleConfig};

#[derive(Debug, Parser)]
#[command(name = "ioncollect", version, about = "Photon collection from a trapped ion into a single-mode fiber")]
struct Cli {
    /// Directory for output files, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads for sweeps and ray fans; 1 runs sequentially.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Resolution: ray-fan nodes for mirror commands, gap samples for
    /// cavity-sweep, rays for mirror-trace.
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Run the full reference regression set into a timestamped directory
    /// under --out-dir, with a pass/fail summary.
    #[arg(long)]
    paper_suite: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, clap::Args)]
struct Inputs {
    /// JSON input file; built-in reference design when omitted.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Override a key of the input, e.g. `--set roc_mm=3` or
    /// `--set 2.mode_overlap=0.9`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, Value)>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Sigma,
    SigmaMinus,
    Pi,
}

impl From<Kind> for TransitionKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Sigma => TransitionKind::SigmaPlus,
            Kind::SigmaMinus => TransitionKind::SigmaMinus,
            Kind::Pi => TransitionKind::Pi,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Axis {
    ThetaMaxDeg,
    Rho0OverF,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Finesse, cooperativity, rates and collection probability of a
    /// fiber-tip cavity.
    CavityEval(Inputs),
    /// Collection probability against cavity length.
    CavitySweep {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 0.01)]
        gap_min_um: f64,
        #[arg(long, default_value_t = 1.5)]
        gap_max_um: f64,
    },
    /// Fraction of dipole emission inside a cone about the field axis.
    Emission {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        theta_max_deg: f64,
    },
    /// Meridional ray trace off a mirror to the analysis plane.
    MirrorTrace(Inputs),
    /// Residual wavefront error against the best-fit Gaussian.
    Opd(Inputs),
    /// Phase plate correcting the residual wavefront, with before/after
    /// coupling.
    PhasePlate(Inputs),
    /// Fiber coupling as the mirror aperture opens.
    CouplingSweep {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "theta-max-deg")]
        axis: Axis,
        /// Comma-separated aperture values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Evaluate each point after phase-plate correction.
        #[arg(long)]
        plate: bool,
    },
    /// Uncorrected spherical mirrors of several sizes.
    ScaleStudy(Inputs),
    /// Single-photon, coincidence and entanglement rate budget.
    RateBudget(Inputs),
}

/// Exit status for a failure: 1 for anything traceable to the input, 2 for
/// failures inside a computation.
fn status(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<InputError>() || cause.is::<serde_json::Error>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidParameter { .. } | Error::Incompatible(_) | Error::Parse(_) => 1,
                _ => 2,
            };
        }
    }
    2
}

fn run(cli: Cli) -> Result<String> {
    let exec = match cli.workers {
        Some(0) => return Err(config::input_error("--workers must be at least 1")),
        Some(1) => Execution::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("starting the worker pool")?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    if cli.samples == Some(0) {
        return Err(config::input_error("--samples must be at least 1"));
    }
    fs::create_dir_all(&cli.out_dir).with_context(|| format!("creating {}", cli.out_dir.display()))?;
    let env = Env {
        out_dir: cli.out_dir,
        exec,
        samples: cli.samples,
    };

    if cli.paper_suite {
        if cli.command.is_some() {
            return Err(config::input_error("--paper-suite runs on its own; drop the subcommand"));
        }
        let (dir, summary) = commands::paper_suite(&env)?;
        let mut out = String::new();
        for c in summary.checks.iter().filter(|c| !c.passed) {
            out += &format!("outside tolerance: {} = {:e}\n", c.id, c.value);
        }
        out += &format!(
            "{} passed, {} failed; results in {}\n",
            summary.passed,
            summary.failed,
            dir.display()
        );
        return Ok(out);
    }

    let Some(command) = cli.command else {
        return Err(config::input_error("no command given; see --help"));
    };
    let mirror = |i: &Inputs| load(i.input.as_deref(), MirrorConfig::default(), &i.overrides);
    match command {
        Command::CavityEval(i) => {
            commands::cavity_eval(&env, &load(i.input.as_deref(), CavityConfig::reference(), &i.overrides)?)
        }
        Command::CavitySweep {
            inputs: i,
            gap_min_um,
            gap_max_um,
        } => commands::cavity_sweep(
            &env,
            &load(i.input.as_deref(), CavityConfig::reference(), &i.overrides)?,
            gap_min_um,
            gap_max_um,
        ),
        Command::Emission { kind, theta_max_deg } => commands::emission(kind.into(), theta_max_deg),
        Command::MirrorTrace(i) => commands::mirror_trace(&env, &mirror(&i)?),
        Command::Opd(i) => commands::opd(&env, &mirror(&i)?),
        Command::PhasePlate(i) => commands::phase_plate(&env, &mirror(&i)?),
        Command::CouplingSweep {
            inputs: i,
            axis,
            values,
            plate,
        } => {
            let axis = match axis {
                Axis::ThetaMaxDeg => SweepAxis::ThetaMaxDeg,
                Axis::Rho0OverF => SweepAxis::Rho0OverF,
            };
            commands::coupling_curve(&env, &mirror(&i)?, axis, &values, plate)
        }
        Command::ScaleStudy(i) => {
            commands::scale(&env, &load(i.input.as_deref(), ScaleConfig::default(), &i.overrides)?)
        }
        Command::RateBudget(i) => {
            commands::rate_budget(&env, &load(i.input.as_deref(), commands::default_budget(), &i.overrides)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(status(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_status_by_error_kind() {
        let input: anyhow::Error = InputError("bad".into()).into();
        assert_eq!(status(&input), 1);
        let invalid: anyhow::Error = Error::Parse("x".into()).into();
        assert_eq!(status(&invalid), 1);
        let stuck: anyhow::Error = Error::NonConvergence("simplex".into()).into();
        assert_eq!(status(&stuck.context("fitting the Gaussian")), 2);
        assert_eq!(status(&Error::ZeroPower.into()), 2);
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
