//! Additive controllability of the linear auxiliary wave system by the Hilbert Uniqueness
//! Method, the semilinear lifting of an additive control, and empirical observability.
//!
//! The discrete control-to-state map `G` is the leapfrog scheme of [`crate::dynamics`]
//! applied to `ψ_tt = Δψ + μψ + 1_O u`. Its adjoint is computed by reverse-mode
//! differentiation of that recurrence, so the Gramian `G G*` is exact at grid level.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{simulate, stable_dt, time_steps, ControlSchedule, TimeSeries, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{dot, laplacian_into, state_norm, Field, Grid1D, Interval, SineBasis, State};
use crate::nonlinearity::NonlinearitySpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HumParams {
    /// Tikhonov weight on `‖λ‖²_H`.
    pub reg_eps: f64,
    pub max_iter: usize,
    /// Stop when the projected gradient falls below this fraction of its initial size.
    pub rel_tol: f64,
    /// Terminal residual target, relative to the data size.
    pub residual_factor: f64,
    pub abs_floor: f64,
    /// Project adjoint data on the lowest `⌊2n/3⌋` sine modes.
    pub filter: bool,
}

impl Default for HumParams {
    fn default() -> Self {
        Self {
            reg_eps: 1e-8,
            max_iter: 400,
            rel_tol: 1e-8,
            residual_factor: 1e-3,
            abs_floor: 1e-12,
            filter: true,
        }
    }
}

/// Default control horizon for `O = (a, b) ⊂ (0, l)`: `2·max(a, l − b) + 0.5`.
pub fn default_control_time(region: Interval, length: f64) -> f64 {
    2.0 * region.a.max(length - region.b) + 0.5
}

/// Time-indexed additive control supported on `O`.
#[derive(Debug, Clone)]
pub struct AdditiveControl {
    pub series: TimeSeries,
    pub t_start: f64,
    pub t_end: f64,
    pub l2t_norm: f64,
    pub region: Interval,
}

impl AdditiveControl {
    fn from_series(series: TimeSeries, region: Interval) -> Self {
        let t_start = series.t0();
        let t_end = series.t_end();
        let l2t_norm = series.l2t_norm();
        Self {
            series,
            t_start,
            t_end,
            l2t_norm,
            region,
        }
    }

    pub fn zero(grid: &Grid1D, region: Interval, t_start: f64, steps: usize, dt: f64) -> Self {
        let z = grid.homogeneous().zeros();
        let series = TimeSeries::new(t_start, dt, vec![z; steps + 1]).expect("valid series");
        Self::from_series(series, region)
    }

    pub fn sup_norm(&self) -> f64 {
        self.series.sup_norm()
    }

    /// Series relabelled to local time starting at zero.
    pub fn local_series(&self) -> TimeSeries {
        self.series.starting_at(0.0)
    }

    /// CSV: `t` followed by the nodal values inside `O`.
    pub fn to_csv(&self) -> String {
        let grid = *self.series.samples()[0].grid();
        let mask = self.region.mask(&grid);
        let mut out = String::from("t");
        for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
            let _ = write!(out, ",x={:.6}", grid.x(i));
        }
        out.push('\n');
        for (k, s) in self.series.samples().iter().enumerate() {
            let _ = write!(out, "{:.9e}", self.series.t0() + k as f64 * self.series.dt());
            for (v, _) in s.values().iter().zip(&mask).filter(|(_, m)| **m) {
                let _ = write!(out, ",{v:.9e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Output of a HUM solve.
#[derive(Debug, Clone)]
pub struct HumSolution {
    pub control: AdditiveControl,
    /// Trajectory of the controlled linear system in local time.
    pub trajectory: Trajectory,
    pub iterations: usize,
    /// `‖ψ(T) − z_d‖_H` from an independent forward simulation.
    pub terminal_residual: f64,
    pub target: f64,
    /// Projected gradient norm per iteration, starting with the initial one.
    pub residual_history: Vec<f64>,
}

#[derive(Clone)]
struct HVec {
    w: Vec<f64>,
    v: Vec<f64>,
}

impl HVec {
    fn zeros(n: usize) -> Self {
        Self {
            w: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn from_state(s: &State) -> Self {
        Self {
            w: s.w.values().to_vec(),
            v: s.wdot.values().to_vec(),
        }
    }

    fn axpy(&mut self, a: f64, other: &HVec) {
        for (x, y) in self.w.iter_mut().zip(&other.w) {
            *x += a * y;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x += a * y;
        }
    }

    /// `self ← other + b·self`.
    fn xpby(&mut self, other: &HVec, b: f64) {
        for (x, y) in self.w.iter_mut().zip(&other.w) {
            *x = y + b * *x;
        }
        for (x, y) in self.v.iter_mut().zip(&other.v) {
            *x = y + b * *x;
        }
    }
}

/// The discretized linear system `ψ_tt = Δψ + μψ + 1_O u` on a homogeneous grid.
struct LinearWave {
    grid: Grid1D,
    mu: Vec<f64>,
    mask: Vec<bool>,
    steps: usize,
    dt: f64,
    basis: Option<(SineBasis, usize)>,
}

impl LinearWave {
    fn n(&self) -> usize {
        self.mu.len()
    }

    fn apply_a(&self, x: &[f64], out: &mut [f64]) {
        laplacian_into(x, &self.grid, out);
        for i in 0..x.len() {
            out[i] += self.mu[i] * x[i];
        }
    }

    /// `−Δ_h x` with homogeneous ghosts.
    fn apply_k(&self, x: &[f64], out: &mut [f64]) {
        laplacian_into(x, &self.grid, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }

    fn inner(&self, a: &HVec, b: &HVec) -> f64 {
        let mut kb = vec![0.0; self.n()];
        self.apply_k(&b.w, &mut kb);
        self.grid.hx() * (dot(&a.w, &kb) + dot(&a.v, &b.v))
    }

    fn norm(&self, a: &HVec) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    fn weight(&self, k: usize) -> f64 {
        if k == 0 || k == self.steps {
            0.5 * self.dt
        } else {
            self.dt
        }
    }

    /// Terminal state from `(x0, v0)` under nodal forcing samples `m` (one per level).
    fn forward(&self, init: &HVec, m: Option<&[Vec<f64>]>) -> HVec {
        let n = self.n();
        let dt = self.dt;
        let dt2 = dt * dt;
        let mut acc = vec![0.0; n];
        let mut prev = init.w.clone();
        self.apply_a(&prev, &mut acc);
        if let Some(m) = m {
            for (a, f) in acc.iter_mut().zip(&m[0]) {
                *a += f;
            }
        }
        let mut cur: Vec<f64> = (0..n).map(|i| prev[i] + dt * init.v[i] + 0.5 * dt2 * acc[i]).collect();
        let mut next = vec![0.0; n];
        for k in 1..=self.steps {
            self.apply_a(&cur, &mut acc);
            if let Some(m) = m {
                for (a, f) in acc.iter_mut().zip(&m[k]) {
                    *a += f;
                }
            }
            for i in 0..n {
                next[i] = 2.0 * cur[i] - prev[i] + dt2 * acc[i];
            }
            if k == self.steps {
                let v = (0..n).map(|i| (next[i] - prev[i]) / (2.0 * dt)).collect();
                return HVec { w: cur, v };
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        unreachable!("steps >= 1")
    }

    /// Euclidean transpose of the forcing-to-terminal map, applied to the cotangent `ybar`.
    fn transpose(&self, ybar: &HVec) -> Vec<Vec<f64>> {
        let n = self.n();
        let dt = self.dt;
        let dt2 = dt * dt;
        let steps = self.steps;
        let mut out = vec![vec![0.0; n]; steps + 1];
        let mut a: Vec<f64> = ybar.v.iter().map(|v| v / (2.0 * dt)).collect();
        let mut b = ybar.w.clone();
        let mut c: Vec<f64> = a.iter().map(|v| -v).collect();
        let mut tmp = vec![0.0; n];
        for k in (1..=steps).rev() {
            for i in 0..n {
                out[k][i] = dt2 * a[i];
            }
            self.apply_a(&a, &mut tmp);
            for i in 0..n {
                b[i] += 2.0 * a[i] + dt2 * tmp[i];
                c[i] -= a[i];
            }
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut b, &mut c);
            c.iter_mut().for_each(|v| *v = 0.0);
        }
        for i in 0..n {
            out[0][i] = 0.5 * dt2 * a[i];
        }
        for m in &mut out {
            for (v, &keep) in m.iter_mut().zip(&self.mask) {
                if !keep {
                    *v = 0.0;
                }
            }
        }
        out
    }

    /// `u = G*λ`, adjoint for the H inner product on states and the
    /// trapezoid-weighted `L²(O × (0,T))` product on controls.
    fn g_star(&self, lam: &HVec) -> Vec<Vec<f64>> {
        let hx = self.grid.hx();
        let mut ybar = HVec::zeros(self.n());
        self.apply_k(&lam.w, &mut ybar.w);
        for i in 0..self.n() {
            ybar.w[i] *= hx;
            ybar.v[i] = hx * lam.v[i];
        }
        let mut m = self.transpose(&ybar);
        for (k, mk) in m.iter_mut().enumerate() {
            let s = 1.0 / (hx * self.weight(k));
            mk.iter_mut().for_each(|v| *v *= s);
        }
        m
    }

    fn gramian(&self, lam: &HVec) -> HVec {
        let u = self.g_star(lam);
        self.forward(&HVec::zeros(self.n()), Some(&u))
    }

    fn project(&self, x: &HVec) -> HVec {
        match &self.basis {
            Some((b, modes)) => HVec {
                w: b.project(&x.w, *modes),
                v: b.project(&x.v, *modes),
            },
            None => x.clone(),
        }
    }
}

/// Steers `z0` to `zd` over `(t0, t_end)` for `ψ_tt = Δψ + μψ + 1_O u` (homogeneous Dirichlet).
///
/// Solves `P(GG* + ε)P λ = P(z_d − S_T z0)` by conjugate residuals in the `H` inner product,
/// so the projected gradient norm is monotone. The result is checked by re-simulation.
pub fn hum_steer_to_target(
    z0: &State,
    zd: &State,
    mu_pot: &Field,
    region: Interval,
    (t0, t_end): (f64, f64),
    dt: f64,
    params: &HumParams,
) -> Result<HumSolution> {
    let grid = z0.grid().homogeneous();
    if !z0.grid().is_homogeneous() || !zd.grid().is_homogeneous() {
        return Err(Error::InvalidInput(
            "HUM acts on the homogeneous auxiliary system; shift the state first".into(),
        ));
    }
    if !(t_end > t0) {
        return Err(Error::InvalidInput(format!("empty control window ({t0}, {t_end})")));
    }
    if !region.within(0.0, grid.length()) {
        return Err(Error::InvalidInput("control region outside the domain".into()));
    }
    let (steps, dt) = time_steps(t_end - t0, dt);
    let n = grid.n_interior();
    let basis = params.filter.then(|| (SineBasis::new(n), (2 * n / 3).max(1)));
    let sys = LinearWave {
        grid,
        mu: mu_pot.values().to_vec(),
        mask: region.mask(&grid),
        steps,
        dt,
        basis,
    };

    let z0v = HVec::from_state(z0);
    let zdv = HVec::from_state(zd);
    let free = sys.forward(&z0v, None);
    let scale = state_norm(z0).max(state_norm(zd));
    let target = (params.residual_factor * scale).max(params.abs_floor);

    // terminal error e = S z0 + Λx − zd, tracked without projection
    let mut err = free.clone();
    err.axpy(-1.0, &zdv);
    let mut rhs = err.clone();
    rhs.w.iter_mut().chain(rhs.v.iter_mut()).for_each(|v| *v = -*v);
    let b = sys.project(&rhs);
    let b_norm = sys.norm(&b);

    let mut x = HVec::zeros(n);
    let mut r = b.clone();
    let mut history = vec![b_norm];
    let mut iterations = 0;
    let mut converged = sys.norm(&err) <= target;

    if !converged && b_norm > 0.0 {
        let apply = |p: &HVec| -> (HVec, HVec) {
            let full = sys.gramian(p);
            let mut bp = sys.project(&full);
            bp.axpy(params.reg_eps, p);
            (full, bp)
        };
        let (mut lr_full, mut br) = apply(&r);
        let mut p = r.clone();
        let mut lp_full = lr_full.clone();
        let mut bp = br.clone();
        let mut rbr = sys.inner(&r, &br);
        while iterations < params.max_iter {
            let bpbp = sys.inner(&bp, &bp);
            if !(bpbp > 0.0) || !(rbr > 0.0) {
                break;
            }
            let alpha = rbr / bpbp;
            x.axpy(alpha, &p);
            err.axpy(alpha, &lp_full);
            r.axpy(-alpha, &bp);
            iterations += 1;
            let rn = sys.norm(&r);
            history.push(rn);
            if sys.norm(&err) <= target || rn <= params.rel_tol * b_norm {
                converged = true;
                break;
            }
            (lr_full, br) = apply(&r);
            let rbr_new = sys.inner(&r, &br);
            let beta = rbr_new / rbr;
            rbr = rbr_new;
            p.xpby(&r, beta);
            lp_full.xpby(&lr_full, beta);
            bp.xpby(&br, beta);
        }
    }
    let predicted = sys.norm(&err);
    if !converged && predicted > target {
        return Err(Error::HumFailed {
            iterations,
            residual: predicted,
            target,
        });
    }

    let u = if iterations == 0 {
        vec![vec![0.0; n]; steps + 1]
    } else {
        sys.g_star(&x)
    };
    let samples: Vec<Field> = u.into_iter().map(|v| Field::from_vec(grid, v)).collect();
    let series = TimeSeries::new(0.0, dt, samples)?;

    let zero = grid.zeros();
    let schedule = ControlSchedule::constant(mu_pot.clone().with_grid(grid), t_end - t0)?;
    let trajectory = simulate(
        z0,
        &schedule,
        &zero,
        &NonlinearitySpec::zero(),
        t_end - t0,
        dt,
        Some(&series),
    )?;
    let terminal_residual = state_norm(&(trajectory.final_state() - zd));
    if terminal_residual > target {
        return Err(Error::HumFailed {
            iterations,
            residual: terminal_residual,
            target,
        });
    }
    let control = AdditiveControl::from_series(series.starting_at(t0), region);
    Ok(HumSolution {
        control,
        trajectory,
        iterations,
        terminal_residual,
        target,
        residual_history: history,
    })
}

/// Null control: [`hum_steer_to_target`] with `z_d = 0`.
pub fn hum_null_control(
    z0: &State,
    mu_pot: &Field,
    region: Interval,
    window: (f64, f64),
    dt: f64,
    params: &HumParams,
) -> Result<HumSolution> {
    let zd = State::zeros(&z0.grid().homogeneous());
    hum_steer_to_target(z0, &zd, mu_pot, region, window, dt, params)
}

/// `u = u0 + h·φ_t − k(φ)`, which makes `φ` solve the damped semilinear system.
///
/// `φ` must be the trajectory driven by `u0` (same levels). Fails unless `h` and `k(φ)`
/// vanish outside `O` at every node and level.
pub fn lift_semilinear_control(
    u0: &AdditiveControl,
    phi: &Trajectory,
    h: &Field,
    f: &NonlinearitySpec,
) -> Result<AdditiveControl> {
    if phi.len() != u0.series.len() {
        return Err(Error::InvalidInput(format!(
            "trajectory has {} levels, control has {}",
            phi.len(),
            u0.series.len()
        )));
    }
    let grid = *h.grid();
    let mask = u0.region.mask(&grid);
    if let Some(i) = (0..grid.n_interior()).find(|&i| !mask[i] && h.values()[i] != 0.0) {
        return Err(Error::SupportViolated {
            hypothesis: format!("supp(h) ⊂ O fails at x = {:.6}", grid.x(i)),
        });
    }
    let mut samples = Vec::with_capacity(phi.len());
    for (k, (s, u)) in phi.states.iter().zip(u0.series.samples()).enumerate() {
        let kphi = f.apply(&s.w);
        let tol = 1e-12 * kphi.sup_norm().max(1.0);
        if let Some(i) = (0..grid.n_interior()).find(|&i| !mask[i] && kphi.values()[i].abs() > tol) {
            return Err(Error::SupportViolated {
                hypothesis: format!(
                    "supp(k∘φ) ⊂ O fails at x = {:.6}, t = {:.6}: k = {:.3e}",
                    grid.x(i),
                    phi.times[k],
                    kphi.values()[i]
                ),
            });
        }
        let vals = (0..grid.n_interior())
            .map(|i| {
                if mask[i] {
                    u.values()[i] + h.values()[i] * s.wdot.values()[i] - kphi.values()[i]
                } else {
                    0.0
                }
            })
            .collect();
        samples.push(Field::from_vec(grid.homogeneous(), vals));
    }
    let series = TimeSeries::new(u0.series.t0(), u0.series.dt(), samples)?;
    Ok(AdditiveControl::from_series(series, u0.region))
}

#[derive(Debug, Clone)]
pub struct ObservabilityReport {
    /// Smallest observed `∫∫ h φ_t² / ‖φ0‖²_H`; an upper bound for the true constant.
    pub delta_estimate: f64,
    pub worst_initial_data: State,
    pub t_obs: f64,
    pub sample_count: usize,
    /// Quotient for every tested datum, eigenmode data first.
    pub quotients: Vec<f64>,
}

impl ObservabilityReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "delta_estimate": self.delta_estimate,
            "T_obs": self.t_obs,
            "sample_count": self.sample_count,
            "quotients": self.quotients,
            "worst_initial_data": {
                "w": self.worst_initial_data.w.values(),
                "wdot": self.worst_initial_data.wdot.values(),
            },
        })
    }
}

/// `∫_0^T ∫ h φ_t² dx dt / ‖φ(0)‖²_H` along the dual system `φ_tt = Δφ + μφ + f(φ)`.
pub fn observability_quotient(
    phi0: &State,
    mu_pot: &Field,
    h: &Field,
    f: &NonlinearitySpec,
    t_obs: f64,
    dt: f64,
) -> Result<f64> {
    let norm2 = state_norm(phi0).powi(2);
    if norm2 == 0.0 {
        return Err(Error::InvalidInput("observability datum must be nonzero".into()));
    }
    let grid = phi0.grid().homogeneous();
    let schedule = ControlSchedule::constant(mu_pot.clone(), t_obs)?;
    let traj = simulate(phi0, &schedule, &grid.zeros(), f, t_obs, dt, None)?;
    let hx = grid.hx();
    let last = traj.len() - 1;
    let integral: f64 = traj
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let w = if k == 0 || k == last { 0.5 } else { 1.0 };
            let local: f64 = s.wdot.values().iter().zip(h.values()).map(|(v, hv)| hv * v * v).sum();
            w * local * hx
        })
        .sum::<f64>()
        * traj.dt;
    Ok(integral / norm2)
}

/// Empirical observability constant: minimum quotient over eigenmode data
/// (`sin(mπx/l)` as displacement or velocity, `m = 1..8`) and `n_random` random data with
/// equal energy per sine mode. All data are scaled to unit `H` norm.
pub fn observability_constant(
    mu_pot: &Field,
    h: &Field,
    f: &NonlinearitySpec,
    t_obs: f64,
    n_random: usize,
    seed: u64,
) -> Result<ObservabilityReport> {
    if !(t_obs > 0.0) {
        return Err(Error::InvalidInput(format!("T_obs must be positive, got {t_obs}")));
    }
    let grid = h.grid().homogeneous();
    let n = grid.n_interior();
    let mut data = Vec::new();
    for m in 1..=8.min(n) {
        let s = grid.sine_mode(m);
        data.push(State::new(s.clone(), grid.zeros())?);
        data.push(State::new(grid.zeros(), s)?);
    }
    let max_mode = (2 * n / 3).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        let mut w = grid.zeros();
        let mut v = grid.zeros();
        for m in 1..=max_mode {
            let s = grid.sine_mode(m);
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            w = w.axpy(a / grid.sine_eigenvalue(m).sqrt(), &s);
            v = v.axpy(b, &s);
        }
        data.push(State::new(w, v)?);
    }
    let data: Vec<State> = data
        .into_iter()
        .map(|d| {
            let s = state_norm(&d);
            d.scale(1.0 / s)
        })
        .collect();
    let dt = stable_dt(&grid, mu_pot.sup_norm(), f.lipschitz());
    let quotients = data
        .par_iter()
        .map(|d| observability_quotient(d, mu_pot, h, f, t_obs, dt))
        .collect::<Result<Vec<f64>>>()?;
    let (worst, delta) = quotients.iter().enumerate().fold(
        (0, f64::INFINITY),
        |(bi, bv), (i, &q)| if q < bv { (i, q) } else { (bi, bv) },
    );
    Ok(ObservabilityReport {
        delta_estimate: delta.max(0.0),
        worst_initial_data: data[worst].clone(),
        t_obs,
        sample_count: data.len(),
        quotients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn system(n: usize, steps: usize) -> LinearWave {
        let grid = Grid1D::new(1.0, n).unwrap();
        LinearWave {
            grid,
            mu: (0..n).map(|i| 0.3 * (i as f64).sin()).collect(),
            mask: Interval::new(0.2, 0.8).unwrap().mask(&grid),
            steps,
            dt: 0.5 * grid.hx(),
            basis: None,
        }
    }

    fn pseudo(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn transpose_passes_dot_product_test() {
        let sys = system(15, 23);
        let n = 15;
        let m: Vec<Vec<f64>> = (0..=sys.steps)
            .map(|k| {
                pseudo(n, k as u64)
                    .into_iter()
                    .zip(&sys.mask)
                    .map(|(v, &keep)| if keep { v } else { 0.0 })
                    .collect()
            })
            .collect();
        let ybar = HVec {
            w: pseudo(n, 100),
            v: pseudo(n, 101),
        };
        let y = sys.forward(&HVec::zeros(n), Some(&m));
        let lhs = dot(&y.w, &ybar.w) + dot(&y.v, &ybar.v);
        let mt = sys.transpose(&ybar);
        let rhs: f64 = m.iter().zip(&mt).map(|(a, b)| dot(a, b)).sum();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn gramian_is_self_adjoint_in_h() {
        let sys = system(15, 30);
        let a = HVec {
            w: pseudo(15, 7),
            v: pseudo(15, 8),
        };
        let b = HVec {
            w: pseudo(15, 9),
            v: pseudo(15, 10),
        };
        let lhs = sys.inner(&sys.gramian(&a), &b);
        let rhs = sys.inner(&a, &sys.gramian(&b));
        assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0));
        assert!(sys.inner(&sys.gramian(&a), &a) >= 0.0);
    }

    #[test]
    fn zero_data_needs_no_iterations() {
        let g = Grid1D::new(1.0, 31).unwrap();
        let z0 = State::zeros(&g);
        let sol = hum_null_control(
            &z0,
            &g.zeros(),
            Interval::new(0.2, 0.8).unwrap(),
            (0.0, 2.5),
            0.5 * g.hx(),
            &HumParams::default(),
        )
        .unwrap();
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.control.sup_norm(), 0.0);
    }

    #[test]
    fn eigenmode_quotient_with_full_damping() {
        let g = Grid1D::new(1.0, 99).unwrap();
        let phi0 = State::new(g.sample(|x| (PI * x).sin()), g.zeros()).unwrap();
        let q = observability_quotient(
            &phi0,
            &g.zeros(),
            &g.constant(1.0),
            &NonlinearitySpec::zero(),
            2.0,
            0.5 * g.hx(),
        )
        .unwrap();
        assert!((q - 1.0).abs() < 2e-2, "{q}");
    }

    #[test]
    fn lift_is_identity_without_damping_or_nonlinearity() {
        let g = Grid1D::new(1.0, 9).unwrap();
        let o = Interval::new(0.2, 0.8).unwrap();
        let u0 = AdditiveControl::from_series(TimeSeries::new(0.0, 0.1, vec![o.indicator(&g); 3]).unwrap(), o);
        let s = State::new(g.constant(0.3), g.constant(0.1)).unwrap();
        let phi = Trajectory {
            times: vec![0.0, 0.1, 0.2],
            states: vec![s; 3],
            dt: 0.1,
        };
        let lifted = lift_semilinear_control(&u0, &phi, &g.zeros(), &NonlinearitySpec::zero()).unwrap();
        assert_eq!(lifted.series, u0.series);
        let damped = lift_semilinear_control(&u0, &phi, &o.indicator(&g), &NonlinearitySpec::zero()).unwrap();
        for (a, b) in damped.series.samples()[1].values().iter().zip(o.mask(&g)) {
            assert!((a - if b { 1.1 } else { 0.0 }).abs() < 1e-15);
        }
        let err = lift_semilinear_control(&u0, &phi, &g.constant(1.0), &NonlinearitySpec::zero());
        assert!(matches!(err, Err(Error::SupportViolated { .. })));
        let err = lift_semilinear_control(&u0, &phi, &g.zeros(), &NonlinearitySpec::sine(1.0));
        assert!(matches!(err, Err(Error::SupportViolated { .. })));
    }
}
