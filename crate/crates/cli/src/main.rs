use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wavectl_core::experiment::{
    run_experiment, ExperimentKind, ExperimentOutcome, ExperimentSpec, ScenarioSource, SimulateControl,
};
use wavectl_core::scenarios::{Preset, ScenarioFile};
use wavectl_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "wavectl",
    version,
    about = "Multiplicative control of 1-D semilinear wave equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario description (JSON); mutually exclusive with --preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named scenario: free-wave, theorem1, example33, nonhomogeneous, hum-unit.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory for the report and CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Interior grid nodes.
    #[arg(long)]
    n: Option<usize>,
    /// Upper bound on the time step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scenario without steering.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        /// Hold the stabilizing potential of the target instead of zero.
        #[arg(long)]
        stabilizing: bool,
    },
    /// Synthesize a multiplicative control and verify it by re-simulation.
    Steer {
        #[arg(value_enum)]
        method: Method,
        #[command(flatten)]
        common: Common,
        /// Phase-1 tolerance (two-phase, exact, exact-nh).
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Steering time (short-time).
        #[arg(long, default_value_t = 0.05)]
        t_steer: f64,
        /// Velocity-jump first phase (exact).
        #[arg(long)]
        undamped: bool,
    },
    /// Estimate the observability constant of the damped dual system.
    Observability {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6.0)]
        t_obs: f64,
        #[arg(long, default_value_t = 16)]
        n_random: usize,
    },
    /// Short-time steering error against T and its log-log slope.
    RateStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
        t_grid: Vec<f64>,
    },
    /// Worked example: sign check of the bump nonlinearity, then exact steering.
    Example33 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Run an experiment spec file (JSON).
    Run { spec: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    ShortTime,
    TwoPhase,
    Exact,
    ExactNh,
}

fn base_spec(kind: ExperimentKind, common: &Common, default: Preset) -> Result<ExperimentSpec> {
    let scenario = match (&common.config, &common.preset) {
        (Some(_), Some(_)) => return Err(Error::Config("--config and --preset are mutually exclusive".into())),
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            ScenarioSource::Inline(Box::new(ScenarioFile::from_json(&text)?))
        }
        (None, Some(name)) => ScenarioSource::Preset(Preset::from_name(name)?),
        (None, None) => ScenarioSource::Preset(default),
    };
    let mut spec = ExperimentSpec::new(kind, scenario, &common.out);
    spec.n_interior = common.n;
    spec.dt = common.dt;
    spec.seed = common.seed;
    Ok(spec)
}

fn build(command: Command) -> Result<ExperimentSpec> {
    Ok(match command {
        Command::Simulate {
            common,
            t_end,
            stabilizing,
        } => {
            let mut s = base_spec(ExperimentKind::Simulate, &common, Preset::FreeWave)?;
            s.t_end = Some(t_end);
            if stabilizing {
                s.control = SimulateControl::Stabilizing;
            }
            s
        }
        Command::Steer {
            method,
            common,
            eps,
            t_steer,
            undamped,
        } => {
            let (kind, preset) = match method {
                Method::ShortTime => (ExperimentKind::SteerShortTime, Preset::Theorem1),
                Method::TwoPhase => (ExperimentKind::SteerTwoPhase, Preset::Example33),
                Method::Exact => (ExperimentKind::SteerExact, Preset::Example33),
                Method::ExactNh => (ExperimentKind::SteerExactNh, Preset::Nonhomogeneous),
            };
            let mut s = base_spec(kind, &common, preset)?;
            s.eps = Some(eps);
            s.t_steer = Some(t_steer);
            s.undamped = undamped;
            s
        }
        Command::Observability {
            common,
            t_obs,
            n_random,
        } => {
            let mut s = base_spec(ExperimentKind::Observability, &common, Preset::Example33)?;
            s.t_obs = Some(t_obs);
            s.n_random = Some(n_random);
            s
        }
        Command::RateStudy { common, t_grid } => {
            let mut s = base_spec(ExperimentKind::RateStudy, &common, Preset::Theorem1)?;
            s.t_grid = Some(t_grid);
            s
        }
        Command::Example33 { common, eps } => {
            let mut s = base_spec(ExperimentKind::Example33, &common, Preset::Example33)?;
            s.eps = Some(eps);
            s
        }
        Command::Run { spec } => ExperimentSpec::from_json(&std::fs::read_to_string(spec)?)?,
    })
}

fn summarize(outcome: &ExperimentOutcome) {
    let r = &outcome.report;
    let kind = r["kind"].as_str().unwrap_or("experiment");
    let key = ["err_H", "slope", "delta_estimate", "energy_drift"]
        .into_iter()
        .find(|k| r.get(*k).is_some_and(|v| v.is_number()));
    match key {
        Some(k) => println!("{kind}: {k} = {}", r[k]),
        None => println!("{kind}: done"),
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    if outcome.exit_code != 0 {
        eprintln!("error target not met");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match build(cli.command).and_then(|spec| run_experiment(&spec)) {
        Ok(outcome) => {
            summarize(&outcome);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
