//! Canned scenarios and the resolution-independent scenario file format.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ScenarioConfig, SolverParams};
use crate::error::{Error, Result};
use crate::grid::{l2_inner, laplacian, Field, Grid1D, Interval, State};
use crate::nonlinearity::{BumpSign, NonlinearitySpec};
use crate::synthesis::{
    check_dissipativity, stabilizing_potential, DissipativityForm, DissipativityReport, SamplingParams,
};

/// Domain length of the worked example.
pub const EXAMPLE33_LENGTH: f64 = 3.0;
pub const EXAMPLE33_N: usize = 299;

/// `ξ1`: `x` on `[0,1]`, `(1−p)e^{p²}` with `p = (x−1)(x−2)` on `[1,2]`, `3−x` on `[2,3]`.
pub fn xi1(x: f64) -> f64 {
    if x <= 1.0 {
        x
    } else if x < 2.0 {
        let p = (x - 1.0) * (x - 2.0);
        (1.0 - p) * (p * p).exp()
    } else {
        3.0 - x
    }
}

/// `ξ1'`, one-sided at the branch points.
pub fn xi1_prime(x: f64) -> f64 {
    if x < 1.0 {
        1.0
    } else if x <= 2.0 {
        let p = (x - 1.0) * (x - 2.0);
        let dp = 2.0 * x - 3.0;
        (p * p).exp() * dp * (-1.0 + 2.0 * p - 2.0 * p * p)
    } else {
        -1.0
    }
}

/// `ξ1''`, zero on the linear branches.
pub fn xi1_second(x: f64) -> f64 {
    if !(1.0..=2.0).contains(&x) {
        return 0.0;
    }
    let p = (x - 1.0) * (x - 2.0);
    let dp = 2.0 * x - 3.0;
    let q = -1.0 + 2.0 * p - 2.0 * p * p;
    let dq = (2.0 - 4.0 * p) * dp;
    (p * p).exp() * (2.0 * p * dp * dp * q + 2.0 * q + dp * dq)
}

/// `‖ξ1‖∞ = 1.25·e^{1/16}`, attained at `x = 3/2`.
pub fn xi1_sup() -> f64 {
    1.25 * (1.0f64 / 16.0).exp()
}

/// `‖b_{ξ1}‖∞ = sup |ξ1''/ξ1|` over the middle branch, sampled finely.
pub fn xi1_potential_sup() -> f64 {
    let n = 30_000;
    (0..=n)
        .map(|j| {
            let x = 1.0 + j as f64 / n as f64;
            (xi1_second(x) / xi1(x)).abs()
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example33Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eta: f64,
    #[serde(default)]
    pub sign: BumpSign,
}

impl Example33Params {
    /// Lower bound on `c`: `‖b_{ξ1}‖∞ · max_{s∈[1,2]} 1/((s−a)²(s−b)²)`.
    pub fn c_lower_bound(a: f64, b: f64) -> f64 {
        let n = 10_000;
        let worst = (0..=n)
            .map(|j| {
                let s = 1.0 + j as f64 / n as f64;
                1.0 / ((s - a).powi(2) * (s - b).powi(2))
            })
            .fold(0.0, f64::max);
        xi1_potential_sup() * worst
    }

    pub fn eta_upper_bound(a: f64) -> f64 {
        a / xi1_sup()
    }

    /// `η = 0.9·a/‖ξ1‖∞` and `c = 1.1×` its lower bound.
    pub fn with_interval(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            c: 1.1 * Self::c_lower_bound(a, b),
            eta: 0.9 * Self::eta_upper_bound(a),
            sign: BumpSign::AsPrinted,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::ParamViolation(s));
        let Example33Params { a, b, c, eta, .. } = *self;
        if !(a > 0.0) {
            return bad(format!("a > 0 fails: a = {a}"));
        }
        if !(a < 1.0) {
            return bad(format!("a < 1 fails: a = {a}"));
        }
        if !(b > 2.0) {
            return bad(format!("b > 2 fails: b = {b}"));
        }
        if !(b < EXAMPLE33_LENGTH) {
            return bad(format!("b < 3 fails: b = {b}"));
        }
        if !(eta > 0.0) {
            return bad(format!("eta > 0 fails: eta = {eta}"));
        }
        let eta_max = Self::eta_upper_bound(a);
        if !(eta < eta_max) {
            return bad(format!("eta < a/‖ξ1‖∞ = {eta_max:.6} fails: eta = {eta}"));
        }
        let c_min = Self::c_lower_bound(a, b);
        if !(c > c_min) {
            return bad(format!("c > ‖b_ξ1‖∞·max 1/((s−a)²(s−b)²) = {c_min:.6} fails: c = {c}"));
        }
        Ok(())
    }
}

impl Default for Example33Params {
    fn default() -> Self {
        Self::with_interval(0.9, 2.1)
    }
}

/// Initial displacement offset of the worked example: a negative bump at `x = 1`.
fn example33_offset(x: f64) -> f64 {
    let r = (x - 1.0) / 0.5;
    if r.abs() < 1.0 {
        -0.45 * (0.5 * PI * r).cos().powi(2)
    } else {
        0.0
    }
}

/// Worked example on `(0, 3)`: damping and control region `(a, b)`, bump nonlinearity with
/// value-space support `(a, b)`, target `(ηξ1, −Δ_h(ηξ1))`.
///
/// The initial velocity `−λθ1` cancels the component of `h·z1` along `θ1`.
pub fn example_33_config(p: &Example33Params, n_interior: usize) -> Result<ScenarioConfig> {
    p.validate()?;
    let grid = Grid1D::new(EXAMPLE33_LENGTH, n_interior)?;
    let region = Interval::new(p.a, p.b)?;
    let h = region.indicator(&grid);
    let theta1 = grid.sample(|x| p.eta * xi1(x));
    let theta2 = -&laplacian(&theta1);
    let z1 = grid.sample(example33_offset);
    let lambda = l2_inner(&h.mul_pointwise(&z1), &theta1) / l2_inner(&theta1, &theta1);
    let initial = State::new(&theta1 + &z1, theta1.scale(-lambda))?;
    let cfg = ScenarioConfig {
        grid,
        damping: h,
        nonlinearity: NonlinearitySpec::bump(p.c, region, p.sign),
        initial,
        theta1,
        theta2,
        region,
        params: SolverParams::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Dissipativity (energy form) of the worked example under both bump signs.
#[derive(Debug, Clone)]
pub struct SignReport {
    pub sign: BumpSign,
    pub report: DissipativityReport,
}

pub fn example33_sign_reports(p: &Example33Params, n_interior: usize) -> Result<Vec<SignReport>> {
    [BumpSign::AsPrinted, BumpSign::Flipped]
        .into_iter()
        .map(|sign| {
            let cfg = example_33_config(&Example33Params { sign, ..*p }, n_interior)?;
            let b = stabilizing_potential(&cfg.theta1, &cfg.nonlinearity, cfg.params.ratio_cap)?;
            let sampling = SamplingParams {
                n_random: cfg.params.dissipativity_samples,
                amplitude: cfg.params.dissipativity_amplitude,
                seed: cfg.params.seed,
            };
            let report = check_dissipativity(
                &b.field,
                &cfg.nonlinearity,
                Some(&cfg.theta1),
                sampling,
                DissipativityForm::Energy,
            );
            Ok(SignReport { sign, report })
        })
        .collect()
}

/// Worked example with the first bump sign (as printed, then flipped) whose potential passes
/// the dissipativity check; `P3Violated` for the as-printed sign if neither does.
pub fn certified_example33(p: &Example33Params, n_interior: usize) -> Result<(ScenarioConfig, Vec<SignReport>)> {
    let reports = example33_sign_reports(p, n_interior)?;
    match reports.iter().find(|r| r.report.passed) {
        Some(r) => Ok((
            example_33_config(&Example33Params { sign: r.sign, ..*p }, n_interior)?,
            reports,
        )),
        None => Err(reports[0].report.clone().into_result().unwrap_err()),
    }
}

/// A scenario plus the equilibrium profile used by the nonhomogeneous pipeline.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub zeta: Option<Field>,
}

impl From<ScenarioConfig> for Scenario {
    fn from(config: ScenarioConfig) -> Self {
        Self { config, zeta: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `sin(πx)` released from rest on `(0, 1)`, no control.
    FreeWave,
    /// Short-time velocity jump on `(0, 1)` with `f = 0.1 sin`.
    Theorem1,
    /// Worked example with the bump sign that passes the dissipativity check.
    Example33,
    /// Dirichlet data 1 on `(0, 1)`, `ζ = 1 + x(1−x)`, global damping and control.
    Nonhomogeneous,
    /// Null control of `(sin πx, 0)` from `(0.2, 0.8)`.
    HumUnit,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::FreeWave,
        Preset::Theorem1,
        Preset::Example33,
        Preset::Nonhomogeneous,
        Preset::HumUnit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::FreeWave => "free-wave",
            Preset::Theorem1 => "theorem1",
            Preset::Example33 => "example33",
            Preset::Nonhomogeneous => "nonhomogeneous",
            Preset::HumUnit => "hum-unit",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))
    }

    pub fn default_n(self) -> usize {
        match self {
            Preset::Example33 => EXAMPLE33_N,
            _ => 199,
        }
    }

    pub fn build(self, n_interior: usize) -> Result<Scenario> {
        let unit = || Grid1D::new(1.0, n_interior);
        let zero_h = |g: Grid1D| g.zeros();
        let mid = Interval::new(0.2, 0.8)?;
        Ok(match self {
            Preset::FreeWave => {
                let g = unit()?;
                let w = g.sine_mode(1);
                ScenarioConfig {
                    grid: g,
                    damping: zero_h(g),
                    nonlinearity: NonlinearitySpec::zero(),
                    initial: State::new(w.clone(), g.zeros())?,
                    theta1: w,
                    theta2: g.zeros(),
                    region: mid,
                    params: SolverParams::default(),
                }
                .into()
            }
            Preset::Theorem1 => {
                let g = unit()?;
                let w1 = g.sample(|x| (PI * x).sin() + 0.25 * (2.0 * PI * x).sin());
                ScenarioConfig {
                    grid: g,
                    damping: zero_h(g),
                    nonlinearity: NonlinearitySpec::sine(0.1),
                    initial: State::new(w1.clone(), g.zeros())?,
                    theta1: w1,
                    theta2: g.sample(|x| (PI * x).sin()),
                    region: mid,
                    params: SolverParams::default(),
                }
                .into()
            }
            Preset::Example33 => certified_example33(&Example33Params::default(), n_interior)?.0.into(),
            Preset::Nonhomogeneous => {
                let g = unit()?.with_boundary(1.0, 1.0);
                let zeta = g.sample(|x| 1.0 + x * (1.0 - x));
                let w0 = g.sample(|x| 1.0 + x * (1.0 - x) + 0.2 * (PI * x).sin());
                let h0 = g.homogeneous();
                Scenario {
                    config: ScenarioConfig {
                        grid: g,
                        damping: h0.constant(1.0),
                        nonlinearity: NonlinearitySpec::sine(0.1),
                        initial: State::new(w0, h0.zeros())?,
                        theta1: g.sample(|x| 1.0 + x * (1.0 - x) + 0.1 * (2.0 * PI * x).sin()),
                        theta2: h0.sample(|x| 0.5 * (PI * x).sin()),
                        region: Interval::new(0.0, 1.0)?,
                        params: SolverParams::default(),
                    },
                    zeta: Some(zeta),
                }
            }
            Preset::HumUnit => {
                let g = unit()?;
                ScenarioConfig {
                    grid: g,
                    damping: zero_h(g),
                    nonlinearity: NonlinearitySpec::zero(),
                    initial: State::new(g.sine_mode(1), g.zeros())?,
                    theta1: g.zeros(),
                    theta2: g.zeros(),
                    region: mid,
                    params: SolverParams::default(),
                }
                .into()
            }
        })
    }
}

/// Field given independently of the resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Constant(f64),
    /// `amplitude · sin(mode·πx/l)`.
    Sine {
        mode: usize,
        amplitude: f64,
    },
    /// `value` on the open interval `(a, b)`, zero elsewhere.
    Indicator {
        a: f64,
        b: f64,
        value: f64,
    },
    /// `c0 + c1·x + c2·x²`.
    Quadratic {
        c0: f64,
        c1: f64,
        c2: f64,
    },
    /// Nodal values; only valid at the matching resolution.
    Values(Vec<f64>),
    Sum(Vec<FieldSpec>),
}

impl FieldSpec {
    fn eval(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        let l = grid.length();
        let xs = grid.nodes();
        Ok(match self {
            FieldSpec::Constant(c) => vec![*c; xs.len()],
            FieldSpec::Sine { mode, amplitude } => xs
                .iter()
                .map(|x| amplitude * (*mode as f64 * PI * x / l).sin())
                .collect(),
            FieldSpec::Indicator { a, b, value } => {
                let r = Interval::new(*a, *b)?;
                xs.iter().map(|&x| if r.contains(x) { *value } else { 0.0 }).collect()
            }
            FieldSpec::Quadratic { c0, c1, c2 } => xs.iter().map(|x| c0 + c1 * x + c2 * x * x).collect(),
            FieldSpec::Values(v) => {
                if v.len() != xs.len() {
                    return Err(Error::Config(format!(
                        "field has {} values but the grid has {} interior nodes",
                        v.len(),
                        xs.len()
                    )));
                }
                v.clone()
            }
            FieldSpec::Sum(parts) => {
                let mut acc = vec![0.0; xs.len()];
                for p in parts {
                    for (a, v) in acc.iter_mut().zip(p.eval(grid)?) {
                        *a += v;
                    }
                }
                acc
            }
        })
    }

    pub fn sample(&self, grid: &Grid1D) -> Result<Field> {
        Field::new(*grid, self.eval(grid)?).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum NonlinearityFile {
    Zero,
    Sine {
        amplitude: f64,
    },
    Linear {
        c: f64,
    },
    /// `c0 + c1·s`.
    Affine {
        c0: f64,
        c1: f64,
    },
    Bump {
        c: f64,
        a: f64,
        b: f64,
        #[serde(default)]
        sign: BumpSign,
    },
}

impl NonlinearityFile {
    pub fn build(&self) -> Result<NonlinearitySpec> {
        Ok(match *self {
            NonlinearityFile::Zero => NonlinearitySpec::zero(),
            NonlinearityFile::Sine { amplitude } => NonlinearitySpec::sine(amplitude),
            NonlinearityFile::Linear { c } => NonlinearitySpec::linear(c),
            NonlinearityFile::Affine { c0, c1 } => {
                NonlinearitySpec::custom(format!("{c0} + {c1}·s"), c1.abs(), move |s| c0 + c1 * s)?
            }
            NonlinearityFile::Bump { c, a, b, sign } => NonlinearitySpec::bump(c, Interval::new(a, b)?, sign),
        })
    }
}

fn default_nonlinearity() -> NonlinearityFile {
    NonlinearityFile::Zero
}

fn zero_field() -> FieldSpec {
    FieldSpec::Constant(0.0)
}

/// JSON scenario description; every field is sampled at the requested resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub length: f64,
    #[serde(default)]
    pub boundary: (f64, f64),
    #[serde(default = "zero_field")]
    pub damping: FieldSpec,
    #[serde(default = "default_nonlinearity")]
    pub nonlinearity: NonlinearityFile,
    pub w0: FieldSpec,
    #[serde(default = "zero_field")]
    pub w1: FieldSpec,
    pub theta1: FieldSpec,
    #[serde(default = "zero_field")]
    pub theta2: FieldSpec,
    pub region: Interval,
    /// Equilibrium profile for the nonhomogeneous pipeline; carries `boundary`.
    #[serde(default)]
    pub zeta: Option<FieldSpec>,
    #[serde(default)]
    pub params: SolverParams,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))
    }

    pub fn build(&self, n_interior: usize) -> Result<Scenario> {
        let (s1, s2) = self.boundary;
        let g = Grid1D::new(self.length, n_interior)?.with_boundary(s1, s2);
        let h0 = g.homogeneous();
        let config = ScenarioConfig {
            grid: g,
            damping: self.damping.sample(&h0)?,
            nonlinearity: self.nonlinearity.build()?,
            initial: State::new(self.w0.sample(&g)?, self.w1.sample(&h0)?)?,
            theta1: self.theta1.sample(&g)?,
            theta2: self.theta2.sample(&h0)?,
            region: self.region,
            params: self.params.clone(),
        };
        config.validate()?;
        let zeta = self.zeta.as_ref().map(|z| z.sample(&g)).transpose()?;
        Ok(Scenario { config, zeta })
    }
}
