//! Leapfrog integration of `w_tt = Δw + v(x,t)w − h(x)w_t + f(w) + g(x,t)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{h01_inner, h01_norm, l2_norm, laplacian_into, state_norm, Field, Grid1D, Interval, State};
use crate::nonlinearity::NonlinearitySpec;

/// Fields sampled on a uniform time grid, read back with zero-order hold.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    samples: Vec<Field>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, samples: Vec<Field>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("time series needs at least one sample".into()));
        }
        if !(dt > 0.0 && dt.is_finite() && t0.is_finite()) {
            return Err(Error::InvalidInput(format!("bad time series spacing dt = {dt}")));
        }
        let g = *samples[0].grid();
        if samples.iter().any(|s| !s.grid().same_mesh(&g)) {
            return Err(Error::InvalidInput(
                "time series samples live on different grids".into(),
            ));
        }
        Ok(Self { t0, dt, samples })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[Field] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + (self.samples.len() - 1) as f64 * self.dt
    }

    pub fn index_at(&self, t: f64) -> usize {
        let k = ((t - self.t0) / self.dt + 1e-6).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.samples.len() - 1)
        }
    }

    pub fn at(&self, t: f64) -> &Field {
        &self.samples[self.index_at(t)]
    }

    /// Same samples, relabelled to start at `t0`.
    pub fn starting_at(&self, t0: f64) -> TimeSeries {
        TimeSeries {
            t0,
            dt: self.dt,
            samples: self.samples.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(usize, &Field) -> Field) -> TimeSeries {
        TimeSeries {
            t0: self.t0,
            dt: self.dt,
            samples: self.samples.iter().enumerate().map(|(i, s)| f(i, s)).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(Field::sup_norm).fold(0.0, f64::max)
    }

    /// `(∫‖u(t)‖²_{L²} dt)^{1/2}` by the trapezoid rule over the samples.
    pub fn l2t_norm(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let sum: f64 = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
                w * l2_norm(s).powi(2)
            })
            .sum();
        (sum * self.dt).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficient {
    Static(Field),
    Sampled(TimeSeries),
}

impl Coefficient {
    pub fn at(&self, t: f64) -> &Field {
        match self {
            Coefficient::Static(f) => f,
            Coefficient::Sampled(s) => s.at(t),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self {
            Coefficient::Static(f) => f.sup_norm(),
            Coefficient::Sampled(s) => s.sup_norm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub t_start: f64,
    pub t_end: f64,
    pub coefficient: Coefficient,
}

/// Piecewise-in-time multiplicative coefficient `v(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    pieces: Vec<Piece>,
}

fn time_tol(t: f64) -> f64 {
    1e-9 * (1.0 + t.abs())
}

impl ControlSchedule {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::InvalidInput("control schedule has no pieces".into()));
        };
        if first.t_start.abs() > time_tol(0.0) {
            return Err(Error::InvalidInput(format!(
                "control schedule must start at t = 0, starts at {}",
                first.t_start
            )));
        }
        for p in &pieces {
            if !(p.t_end > p.t_start) {
                return Err(Error::InvalidInput(format!(
                    "empty schedule piece ({}, {})",
                    p.t_start, p.t_end
                )));
            }
        }
        for w in pieces.windows(2) {
            if (w[0].t_end - w[1].t_start).abs() > time_tol(w[0].t_end) {
                return Err(Error::InvalidInput(format!(
                    "schedule pieces not contiguous at t = {}",
                    w[0].t_end
                )));
            }
        }
        Ok(Self { pieces })
    }

    pub fn constant(v: Field, t_end: f64) -> Result<Self> {
        Self::new(vec![Piece {
            t_start: 0.0,
            t_end,
            coefficient: Coefficient::Static(v),
        }])
    }

    /// Appends a piece running from the current end to `t_end`.
    pub fn then(mut self, t_end: f64, coefficient: Coefficient) -> Result<Self> {
        let t_start = self.end_time();
        self.pieces.push(Piece {
            t_start,
            t_end,
            coefficient,
        });
        Self::new(self.pieces)
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn end_time(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.t_end)
    }

    pub fn piece_at(&self, t: f64) -> &Piece {
        let tol = time_tol(t);
        self.pieces
            .iter()
            .rev()
            .find(|p| p.t_start <= t + tol)
            .unwrap_or(&self.pieces[0])
    }

    pub fn at(&self, t: f64) -> &Field {
        self.piece_at(t).coefficient.at(t)
    }

    pub fn sup_norm(&self) -> f64 {
        self.pieces.iter().map(|p| p.coefficient.sup_norm()).fold(0.0, f64::max)
    }

    /// `(∫‖v(t)‖²_{L²} dt)^{1/2}`; sampled pieces use the trapezoid rule.
    pub fn l2t_norm(&self) -> f64 {
        let mut acc = 0.0;
        for p in &self.pieces {
            match &p.coefficient {
                Coefficient::Static(f) => acc += l2_norm(f).powi(2) * (p.t_end - p.t_start),
                Coefficient::Sampled(s) => acc += s.l2t_norm().powi(2),
            }
        }
        acc.sqrt()
    }
}

/// Stability policy `dt = min(0.5·h_x, 0.5/sqrt(1 + ‖v‖∞ + L))`.
pub fn stable_dt(grid: &Grid1D, v_sup: f64, lipschitz: f64) -> f64 {
    (0.5 * grid.hx()).min(0.5 / (1.0 + v_sup + lipschitz).sqrt())
}

/// Number of steps covering `(0, t_end)` with spacing at most `dt`, and the effective spacing.
pub fn time_steps(t_end: f64, dt: f64) -> (usize, f64) {
    let n = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub dt: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    pub fn norms(&self) -> Vec<f64> {
        self.states.iter().map(state_norm).collect()
    }

    pub fn errors_to(&self, target: &State) -> Vec<f64> {
        self.states.iter().map(|s| state_norm(&(s - target))).collect()
    }

    /// Trajectory of `z = y − target`.
    pub fn shifted(&self, target: &State) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(|s| s - target).collect(),
            dt: self.dt,
        }
    }

    pub fn at_rest(state: State, dt: f64) -> Trajectory {
        Trajectory {
            times: vec![0.0],
            states: vec![state],
            dt,
        }
    }

    /// Appends `next`, whose first level duplicates the current final one. Times are shifted
    /// to continue from `t_end`; `dt` stays that of the first segment.
    pub fn concat(mut self, next: &Trajectory) -> Trajectory {
        let (t0, s0) = (self.t_end(), next.times[0]);
        self.times.extend(next.times[1..].iter().map(|t| t0 + t - s0));
        self.states.extend_from_slice(&next.states[1..]);
        self
    }

    /// Leading part `t ≤ t_cut`.
    pub fn truncated(&self, t_cut: f64) -> Trajectory {
        let k = self
            .times
            .iter()
            .position(|&t| t > t_cut + time_tol(t_cut))
            .unwrap_or(self.times.len())
            .max(1);
        Trajectory {
            times: self.times[..k].to_vec(),
            states: self.states[..k].to_vec(),
            dt: self.dt,
        }
    }

    /// Energy conserved (or dissipated) exactly by the scheme between levels `n` and `n+1`:
    /// `½‖(w^{n+1}−w^n)/dt‖² + ½⟨w^{n+1}, w^n⟩_{H¹₀}`.
    pub fn staggered_energies(&self) -> Vec<f64> {
        self.states
            .windows(2)
            .map(|p| {
                let dw = (&p[1].w - &p[0].w).scale(1.0 / self.dt);
                0.5 * l2_norm(&dw).powi(2) + 0.5 * h01_inner(&p[1].w, &p[0].w)
            })
            .collect()
    }

    /// CSV with columns `t,h01_norm_w,l2_norm_wdot,energy,err_to_target_H`.
    pub fn to_csv(&self, target: &State) -> String {
        let mut out = String::from("t,h01_norm_w,l2_norm_wdot,energy,err_to_target_H\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = writeln!(
                out,
                "{t:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                h01_norm(&s.w),
                l2_norm(&s.wdot),
                energy(s),
                state_norm(&(s - target))
            );
        }
        out
    }
}

/// `E = ½‖y‖²_H`.
pub fn energy(y: &State) -> f64 {
    0.5 * state_norm(y).powi(2)
}

struct Stepper<'a> {
    grid: Grid1D,
    schedule: &'a ControlSchedule,
    h: &'a [f64],
    f: &'a NonlinearitySpec,
    g: Option<&'a TimeSeries>,
    fbuf: Vec<f64>,
}

impl Stepper<'_> {
    fn acc(&mut self, t: f64, w: &[f64], out: &mut [f64]) {
        laplacian_into(w, &self.grid, out);
        let v = self.schedule.at(t).values();
        for i in 0..w.len() {
            out[i] += v[i] * w[i];
        }
        if !self.f.is_zero() {
            self.f.apply_into(w, &mut self.fbuf);
            for (o, fv) in out.iter_mut().zip(&self.fbuf) {
                *o += fv;
            }
        }
        if let Some(g) = self.g {
            for (o, gv) in out.iter_mut().zip(g.at(t).values()) {
                *o += gv;
            }
        }
    }
}

fn check_finite(w: &[f64], t: f64) -> Result<()> {
    if w.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { t })
    }
}

/// Integrates from `y0` at `t = 0` to `t_end`, recording every level.
///
/// The spacing is reduced to `t_end / ceil(t_end / dt)` so the final level lands on `t_end`.
/// Velocities are reported as centred differences `(w^{n+1} − w^{n−1}) / 2dt`.
pub fn simulate(
    y0: &State,
    schedule: &ControlSchedule,
    h: &Field,
    f: &NonlinearitySpec,
    t_end: f64,
    dt: f64,
    g: Option<&TimeSeries>,
) -> Result<Trajectory> {
    let grid = *y0.w.grid();
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidInput(format!("t_end must be positive, got {t_end}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if schedule.end_time() + time_tol(t_end) < t_end {
        return Err(Error::InvalidInput(format!(
            "schedule ends at {} before t_end = {t_end}",
            schedule.end_time()
        )));
    }
    if !h.grid().same_mesh(&grid) || !y0.wdot.grid().same_mesh(&grid) {
        return Err(Error::InvalidInput("damping and state live on different grids".into()));
    }
    let bound = stable_dt(&grid, schedule.sup_norm(), f.lipschitz());
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::StabilityViolation { dt, bound });
    }
    let (steps, dt) = time_steps(t_end, dt);
    let n = grid.n_interior();
    let hv = h.values();
    let mut st = Stepper {
        grid,
        schedule,
        h: hv,
        f,
        g,
        fbuf: vec![0.0; n],
    };

    let dt2 = dt * dt;
    let mut acc = vec![0.0; n];
    let mut prev = y0.w.values().to_vec();
    let v0 = y0.wdot.values();
    st.acc(0.0, &prev, &mut acc);
    let mut cur: Vec<f64> = (0..n)
        .map(|i| prev[i] + dt * v0[i] + 0.5 * dt2 * (acc[i] - st.h[i] * v0[i]))
        .collect();
    check_finite(&cur, dt)?;

    let wgrid = grid;
    let vgrid = grid.homogeneous();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(y0.clone());

    let mut next = vec![0.0; n];
    for k in 1..=steps {
        let t = k as f64 * dt;
        st.acc(t, &cur, &mut acc);
        for i in 0..n {
            let c = 0.5 * dt * st.h[i];
            next[i] = (2.0 * cur[i] - (1.0 - c) * prev[i] + dt2 * acc[i]) / (1.0 + c);
        }
        check_finite(&next, t + dt)?;
        let vel: Vec<f64> = (0..n).map(|i| (next[i] - prev[i]) / (2.0 * dt)).collect();
        times.push(t);
        states.push(State {
            w: Field::from_vec(wgrid, cur.clone()),
            wdot: Field::from_vec(vgrid, vel),
        });
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(Trajectory { times, states, dt })
}

/// One step with a static coefficient and forcing; equivalent to the first level of [`simulate`].
pub fn step(y: &State, dt: f64, v: &Field, h: &Field, f: &NonlinearitySpec, g: Option<&Field>) -> Result<State> {
    let schedule = ControlSchedule::constant(v.clone(), dt)?;
    let forcing = g.map(|g| TimeSeries::new(0.0, dt, vec![g.clone()])).transpose()?;
    let traj = simulate(y, &schedule, h, f, dt, dt, forcing.as_ref())?;
    Ok(traj.states[1].clone())
}

/// Numerical knobs shared by the synthesis pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub ratio_cap: f64,
    pub tau_cond: f64,
    /// Overrides the stability policy when set (must still satisfy it).
    pub dt: Option<f64>,
    pub decay_horizon: f64,
    pub seed: u64,
    pub dissipativity_samples: usize,
    pub dissipativity_amplitude: f64,
    pub reg_eps: f64,
    pub hum_max_iter: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            ratio_cap: 1e6,
            tau_cond: 1e-8,
            dt: None,
            decay_horizon: 40.0,
            seed: 0x5eed,
            dissipativity_samples: 64,
            dissipativity_amplitude: 2.5,
            reg_eps: 1e-8,
            hum_max_iter: 400,
        }
    }
}

/// Everything a steering pipeline needs: domain, coefficients, data and target.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub grid: Grid1D,
    pub damping: Field,
    pub nonlinearity: NonlinearitySpec,
    pub initial: State,
    pub theta1: Field,
    pub theta2: Field,
    pub region: Interval,
    pub params: SolverParams,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        for (name, f) in [
            ("damping", &self.damping),
            ("initial displacement", &self.initial.w),
            ("initial velocity", &self.initial.wdot),
            ("theta1", &self.theta1),
            ("theta2", &self.theta2),
        ] {
            if !f.grid().same_mesh(g) {
                return Err(Error::InvalidInput(format!("{name} lives on a different grid")));
            }
        }
        if !self.region.within(0.0, g.length()) {
            return Err(Error::InvalidInput(format!(
                "control region ({}, {}) is not inside (0, {})",
                self.region.a,
                self.region.b,
                g.length()
            )));
        }
        check_damping(&self.damping)
    }

    pub fn target(&self) -> State {
        State {
            w: self.theta1.clone(),
            wdot: self.theta2.clone(),
        }
    }

    /// Requested spacing, or the policy bound for a coefficient of size `v_sup`.
    pub fn dt_for(&self, v_sup: f64) -> f64 {
        let policy = stable_dt(&self.grid, v_sup, self.nonlinearity.lipschitz());
        self.params.dt.map_or(policy, |d| d.min(policy))
    }
}

/// Nonnegativity of the damping, nodally.
pub fn check_damping(h: &Field) -> Result<()> {
    match h.values().iter().position(|&v| v < 0.0) {
        Some(node) => Err(Error::P2Violated {
            node,
            value: h.values()[node],
        }),
        None => Ok(()),
    }
}
