//! Experiment harness: JSON specs, rate studies and report emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{simulate, ControlSchedule, ScenarioConfig, Trajectory};
use crate::error::{Error, Result};
use crate::grid::state_norm;
use crate::hum::observability_constant;
use crate::nonlinearity::NonlinearitySpec;
use crate::scenarios::{certified_example33, Example33Params, Preset, Scenario, ScenarioFile};
use crate::synthesis::{
    exact_steer, exact_steer_nonhomogeneous, short_time_steer, stabilizing_potential, two_phase_schedule,
    SteeringReport,
};

pub const MAX_N_INTERIOR: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    SteerShortTime,
    SteerTwoPhase,
    SteerExact,
    SteerExactNh,
    Observability,
    RateStudy,
    Example33,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSource {
    Preset(Preset),
    Inline(Box<ScenarioFile>),
}

impl ScenarioSource {
    pub fn default_n(&self) -> usize {
        match self {
            ScenarioSource::Preset(p) => p.default_n(),
            ScenarioSource::Inline(_) => 199,
        }
    }

    pub fn build(&self, n_interior: usize) -> Result<Scenario> {
        match self {
            ScenarioSource::Preset(p) => p.build(n_interior),
            ScenarioSource::Inline(f) => f.build(n_interior),
        }
    }
}

/// Control held during a plain simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulateControl {
    #[default]
    None,
    /// The stabilizing potential of `θ1`.
    Stabilizing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub scenario: ScenarioSource,
    #[serde(default)]
    pub n_interior: Option<usize>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    /// `simulate`: horizon.
    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub control: SimulateControl,
    /// `steer_short_time`: steering time.
    #[serde(default)]
    pub t_steer: Option<f64>,
    /// Two-phase and exact steering: phase-1 tolerance.
    #[serde(default)]
    pub eps: Option<f64>,
    /// `steer_exact`: use the velocity-jump first phase instead of damping.
    #[serde(default)]
    pub undamped: bool,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub t_obs: Option<f64>,
    #[serde(default)]
    pub n_random: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, scenario: ScenarioSource, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            kind,
            scenario,
            n_interior: None,
            dt: None,
            seed: None,
            out_dir: out_dir.into(),
            t_end: None,
            control: SimulateControl::None,
            t_steer: None,
            eps: None,
            undamped: false,
            t_grid: None,
            t_obs: None,
            n_random: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("experiment spec: {e}")))
    }

    pub fn n(&self) -> usize {
        self.n_interior.unwrap_or_else(|| self.scenario.default_n())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if !(3..=MAX_N_INTERIOR).contains(&n) {
            return Err(Error::Config(format!("n_interior = {n} outside [3, {MAX_N_INTERIOR}]")));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("dt override must be positive, got {dt}")));
            }
        }
        let need = |present: bool, field: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("{:?} needs `{field}`", self.kind)))
            }
        };
        let positive = |v: Option<f64>, field: &str| match v {
            Some(x) if x > 0.0 && x.is_finite() => Ok(()),
            Some(x) => Err(Error::Config(format!("`{field}` must be positive, got {x}"))),
            None => need(false, field),
        };
        match self.kind {
            ExperimentKind::Simulate => positive(self.t_end, "t_end"),
            ExperimentKind::SteerShortTime => positive(self.t_steer, "t_steer"),
            ExperimentKind::SteerTwoPhase
            | ExperimentKind::SteerExact
            | ExperimentKind::SteerExactNh
            | ExperimentKind::Example33 => positive(self.eps, "eps"),
            ExperimentKind::Observability => positive(self.t_obs, "t_obs"),
            ExperimentKind::RateStudy => need(self.t_grid.is_some(), "t_grid"),
        }
    }

    fn scenario(&self) -> Result<Scenario> {
        let mut s = self.scenario.build(self.n())?;
        self.tune(&mut s.config);
        Ok(s)
    }

    fn tune(&self, cfg: &mut ScenarioConfig) {
        if self.dt.is_some() {
            cfg.params.dt = self.dt;
        }
        if let Some(seed) = self.seed {
            cfg.params.seed = seed;
        }
    }
}

/// Result of a completed experiment; files are only written once everything is computed.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    /// 0 when every certificate passed and the error target was met.
    pub exit_code: i32,
    pub files: Vec<PathBuf>,
    pub report: Value,
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
    Ok(path)
}

fn steering_value(r: &SteeringReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let mut outputs: Vec<(&str, String)> = Vec::new();
    let (report, ok) = match spec.kind {
        ExperimentKind::Simulate => {
            let s = spec.scenario()?;
            let cfg = &s.config;
            let t_end = spec.t_end.expect("validated");
            let v = match spec.control {
                SimulateControl::None => cfg.grid.homogeneous().zeros(),
                SimulateControl::Stabilizing => {
                    stabilizing_potential(&cfg.theta1, &cfg.nonlinearity, cfg.params.ratio_cap)?.field
                }
            };
            let dt = cfg.dt_for(v.sup_norm());
            let schedule = ControlSchedule::constant(v, t_end)?;
            let traj = simulate(
                &cfg.initial,
                &schedule,
                &cfg.damping,
                &cfg.nonlinearity,
                t_end,
                dt,
                None,
            )?;
            let target = cfg.target();
            outputs.push(("trajectory.csv", traj.to_csv(&target)));
            (simulate_report(cfg, &traj, spec.control), true)
        }
        ExperimentKind::SteerShortTime => {
            let s = spec.scenario()?;
            let (_, r) = short_time_steer(&s.config, spec.t_steer.expect("validated"))?;
            steering_outputs(&mut outputs, &s.config, &r)
        }
        ExperimentKind::SteerTwoPhase => {
            let s = spec.scenario()?;
            let (_, r) = two_phase_schedule(&s.config, spec.eps.expect("validated"))?;
            steering_outputs(&mut outputs, &s.config, &r)
        }
        ExperimentKind::SteerExact => {
            let s = spec.scenario()?;
            let (_, r) = exact_steer(&s.config, spec.eps.expect("validated"), !spec.undamped)?;
            steering_outputs(&mut outputs, &s.config, &r)
        }
        ExperimentKind::SteerExactNh => {
            let s = spec.scenario()?;
            let zeta = s
                .zeta
                .as_ref()
                .ok_or_else(|| Error::Config("nonhomogeneous steering needs a `zeta` profile".into()))?;
            let (_, r) = exact_steer_nonhomogeneous(&s.config, zeta, spec.eps.expect("validated"))?;
            steering_outputs(&mut outputs, &s.config, &r)
        }
        ExperimentKind::Observability => {
            let s = spec.scenario()?;
            let cfg = &s.config;
            let h0 = cfg.grid.homogeneous();
            let n_random = spec.n_random.unwrap_or(16);
            let rep = observability_constant(
                &h0.zeros(),
                &cfg.damping,
                &NonlinearitySpec::zero(),
                spec.t_obs.expect("validated"),
                n_random,
                cfg.params.seed,
            )?;
            let ok = rep.delta_estimate > 0.0;
            let mut v = rep.to_json();
            v["kind"] = json!("observability");
            v["seed"] = json!(cfg.params.seed);
            v["n_interior"] = json!(cfg.grid.n_interior());
            (v, ok)
        }
        ExperimentKind::RateStudy => {
            let grid = spec.t_grid.clone().expect("validated");
            let study = rate_study(
                |n| {
                    let mut cfg = spec.scenario.build(n)?.config;
                    spec.tune(&mut cfg);
                    Ok(cfg)
                },
                spec.n(),
                &grid,
            )?;
            let mut csv = String::from("T,err_H\n");
            for (t, e) in study.t_grid.iter().zip(&study.errors) {
                csv.push_str(&format!("{t:.9e},{e:.9e}\n"));
            }
            outputs.push(("rate.csv", csv));
            let ok = (0.8..=1.2).contains(&study.slope) && study.spatial_ok;
            (serde_json::to_value(&study).expect("serializes"), ok)
        }
        ExperimentKind::Example33 => {
            let params = Example33Params::default();
            let (mut cfg, signs) = certified_example33(&params, spec.n())?;
            spec.tune(&mut cfg);
            let (_, r) = exact_steer(&cfg, spec.eps.expect("validated"), true)?;
            let (mut v, ok) = steering_outputs(&mut outputs, &cfg, &r);
            v["example"] = json!({
                "a": params.a,
                "b": params.b,
                "c": params.c,
                "eta": params.eta,
                "sign_checks": signs.iter().map(|s| json!({
                    "sign": s.sign,
                    "passed": s.report.passed,
                    "max_ratio": s.report.max_ratio,
                })).collect::<Vec<_>>(),
                "sign_used": signs.iter().find(|s| s.report.passed).map(|s| s.sign),
            });
            (v, ok)
        }
    };
    let report_text = serde_json::to_string_pretty(&report).expect("serializes");
    outputs.push(("report.json", report_text));
    let files = outputs
        .iter()
        .map(|(name, text)| write_atomic(&spec.out_dir, name, text))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutcome {
        exit_code: if ok { 0 } else { 4 },
        files,
        report,
    })
}

fn steering_outputs(outputs: &mut Vec<(&str, String)>, cfg: &ScenarioConfig, r: &SteeringReport) -> (Value, bool) {
    outputs.push(("trajectory.csv", r.trajectory.to_csv(&cfg.target())));
    (steering_value(r), r.target_met)
}

fn simulate_report(cfg: &ScenarioConfig, traj: &Trajectory, control: SimulateControl) -> Value {
    let energies: Vec<f64> = traj.states.iter().map(crate::dynamics::energy).collect();
    let e0 = energies[0];
    let drift = energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / e0.max(f64::MIN_POSITIVE);
    json!({
        "kind": "simulate",
        "control": control,
        "n_interior": cfg.grid.n_interior(),
        "dt": traj.dt,
        "t_end": traj.t_end(),
        "energy_initial": e0,
        "energy_final": energies[energies.len() - 1],
        "energy_drift": drift,
        "err_H": state_norm(&(traj.final_state() - &cfg.target())),
        "seed": cfg.params.seed,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(
            "log-log fit needs at least 2 aligned points".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("log-log fit needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Serialize)]
pub struct RateStudy {
    pub kind: &'static str,
    #[serde(rename = "T_grid")]
    pub t_grid: Vec<f64>,
    #[serde(rename = "err_H")]
    pub errors: Vec<f64>,
    pub slope: f64,
    pub n_interior: usize,
    /// `|err(n) − err(2n+1)|` at the smallest `T`.
    pub spatial_error: f64,
    pub spatial_ok: bool,
    pub refinements: usize,
}

fn steering_error(cfg: &ScenarioConfig, t: f64) -> Result<f64> {
    Ok(short_time_steer(cfg, t)?.1.err_h)
}

/// Short-time steering error over a geometric `T` grid, refining the mesh until the spatial
/// error at the smallest `T` is below 10% of the smallest steering error.
pub fn rate_study(build: impl Fn(usize) -> Result<ScenarioConfig>, n0: usize, t_grid: &[f64]) -> Result<RateStudy> {
    if t_grid.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "rate study needs at least 3 steering times, got {}",
            t_grid.len()
        )));
    }
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidInput("steering times must be positive".into()));
    }
    let q = t_grid[1] / t_grid[0];
    if (q - 1.0).abs() < 1e-12 || t_grid.windows(2).any(|w| ((w[1] / w[0]) / q - 1.0).abs() > 1e-6) {
        return Err(Error::InvalidInput(
            "steering times must be geometrically spaced".into(),
        ));
    }
    let i_min = (0..t_grid.len())
        .min_by(|&a, &b| t_grid[a].total_cmp(&t_grid[b]))
        .expect("nonempty");
    let mut n = n0;
    let mut refinements = 0;
    loop {
        let cfg = build(n)?;
        let errors = t_grid
            .iter()
            .map(|&t| steering_error(&cfg, t))
            .collect::<Result<Vec<_>>>()?;
        let n_fine = 2 * n + 1;
        let spatial_error = if n_fine <= MAX_N_INTERIOR {
            (steering_error(&build(n_fine)?, t_grid[i_min])? - errors[i_min]).abs()
        } else {
            f64::INFINITY
        };
        let min_err = errors.iter().copied().fold(f64::INFINITY, f64::min);
        let spatial_ok = spatial_error <= 0.1 * min_err;
        if spatial_ok || 2 * n_fine + 1 > MAX_N_INTERIOR {
            return Ok(RateStudy {
                kind: "rate_study",
                slope: fit_loglog_slope(t_grid, &errors)?,
                t_grid: t_grid.to_vec(),
                errors,
                n_interior: n,
                spatial_error,
                spatial_ok,
                refinements,
            });
        }
        n = n_fine;
        refinements += 1;
    }
}
