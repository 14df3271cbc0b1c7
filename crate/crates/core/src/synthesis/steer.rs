//! Steering pipelines: short-time, two-phase, and exact steering by divide-through.

use crate::approx::mollify;
use crate::dynamics::{
    simulate, stable_dt, time_steps, Coefficient, ControlSchedule, Piece, ScenarioConfig, TimeSeries, Trajectory,
};
use crate::error::{Error, Result};
use crate::grid::{laplacian, state_norm, Field, Interval, State, TAU_SUPP};
use crate::hum::{default_control_time, hum_steer_to_target, lift_semilinear_control, HumParams};

use super::certificates::{check_dissipativity, DissipativityForm, DissipativityReport, SamplingParams};
use super::decay::{estimate_decay, DecayFit};
use super::ratio::{admissible_ratio, check_condition_two, stabilizing_potential, velocity_jump_control, RatioField};
use super::report::{Certificates, Diagnostics, PhaseError, SteeringReport};

/// Bound on `max|Δ_h d|` below which the phase-2 ratio is used without smoothing.
const SMOOTH_D_BOUND: f64 = 1e4;
const TAU_HALVINGS: u32 = 8;
const HUM_RETRY_FACTOR: f64 = 1.5;

fn hum_params(cfg: &ScenarioConfig) -> HumParams {
    HumParams {
        reg_eps: cfg.params.reg_eps,
        max_iter: cfg.params.hum_max_iter,
        ..HumParams::default()
    }
}

fn sampling(cfg: &ScenarioConfig) -> SamplingParams {
    SamplingParams {
        n_random: cfg.params.dissipativity_samples,
        amplitude: cfg.params.dissipativity_amplitude,
        seed: cfg.params.seed,
    }
}

struct Certified {
    b: RatioField,
    p3_l2: DissipativityReport,
}

/// (P1), (P2), (P4) and the energy form of (P3) for `ζ`.
fn certify(cfg: &ScenarioConfig, zeta: &Field, check_p3: bool) -> Result<Certified> {
    cfg.validate()?;
    let f = &cfg.nonlinearity;
    let b = stabilizing_potential(zeta, f, cfg.params.ratio_cap)?;
    let theta = Some(zeta);
    if check_p3 {
        check_dissipativity(&b.field, f, theta, sampling(cfg), DissipativityForm::Energy).into_result()?;
    }
    let p3_l2 = check_dissipativity(&b.field, f, theta, sampling(cfg), DissipativityForm::L2);
    Ok(Certified { b, p3_l2 })
}

fn rest_at(theta: &Field) -> State {
    State {
        w: theta.clone(),
        wdot: theta.grid().homogeneous().zeros(),
    }
}

/// Result of simulating under the stabilizing potential.
pub struct Stabilization {
    pub trajectory: Trajectory,
    pub fit: DecayFit,
}

/// Runs `v = b` from the initial state for `horizon` and fits the decay of `y − (θ, 0)`.
pub fn stabilize(cfg: &ScenarioConfig, b: &Field, theta: &Field, horizon: f64, dt: f64) -> Result<Stabilization> {
    let schedule = ControlSchedule::constant(b.clone(), horizon)?;
    let trajectory = simulate(
        &cfg.initial,
        &schedule,
        &cfg.damping,
        &cfg.nonlinearity,
        horizon,
        dt,
        None,
    )?;
    let fit = estimate_decay(&trajectory.shifted(&rest_at(theta)))?;
    Ok(Stabilization { trajectory, fit })
}

struct PhaseOne {
    t1: f64,
    state: State,
    trajectory: Trajectory,
    fit: Option<DecayFit>,
}

/// Damped phase 1: hold `b` until the fitted majorant drops below `target`.
fn damped_phase_one(cfg: &ScenarioConfig, b: &Field, theta: &Field, target: f64, dt: f64) -> Result<PhaseOne> {
    let rest = rest_at(theta);
    let z0 = state_norm(&(&cfg.initial - &rest));
    if z0 <= target {
        return Ok(PhaseOne {
            t1: 0.0,
            state: cfg.initial.clone(),
            trajectory: Trajectory::at_rest(cfg.initial.clone(), dt),
            fit: None,
        });
    }
    let horizon = cfg.params.decay_horizon;
    let (_, dt) = time_steps(horizon, dt);
    let probe = stabilize(cfg, b, theta, horizon, dt)?;
    let t1_raw = probe.fit.time_to_reach(z0, target)?;
    let k = (t1_raw / dt).ceil().max(1.0) as usize;
    let t1 = k as f64 * dt;
    let trajectory = if k < probe.trajectory.len() {
        probe.trajectory.truncated(t1)
    } else {
        let schedule = ControlSchedule::constant(b.clone(), t1)?;
        simulate(&cfg.initial, &schedule, &cfg.damping, &cfg.nonlinearity, t1, dt, None)?
    };
    Ok(PhaseOne {
        t1,
        state: trajectory.final_state().clone(),
        trajectory,
        fit: Some(probe.fit),
    })
}

/// Theorem-1 style steering over `(0, T)` with the static control `a/T`.
///
/// Target is `(w1, θ2)`: the velocity jumps while the displacement stays put.
pub fn short_time_steer(cfg: &ScenarioConfig, t: f64) -> Result<(ControlSchedule, SteeringReport)> {
    cfg.validate()?;
    let y0 = &cfg.initial;
    let v = velocity_jump_control(
        &y0.w,
        &y0.wdot,
        &cfg.theta2,
        t,
        cfg.params.ratio_cap,
        cfg.params.tau_cond,
    )?;
    let dt = cfg.dt_for(v.sup_norm()).min(t / 32.0);
    let schedule = ControlSchedule::constant(v.clone(), t)?;
    let traj = simulate(y0, &schedule, &cfg.damping, &cfg.nonlinearity, t, dt, None)?;
    let target = State {
        w: y0.w.clone(),
        wdot: cfg.theta2.clone(),
    };
    let fin = traj.final_state().clone();
    let err_h = state_norm(&(&fin - &target));
    let report = SteeringReport {
        kind: "short_time".into(),
        err_h,
        target_norm: state_norm(&target),
        target_met: err_h.is_finite(),
        phase_errors: vec![PhaseError {
            phase: "velocity_jump".into(),
            err_h,
        }],
        t1: None,
        t,
        m: None,
        sigma: None,
        mu: None,
        control_sup_norm: schedule.sup_norm(),
        control_l2t_norm: schedule.l2t_norm(),
        certificates: Certificates {
            p1: Some(true),
            cond_ii: Some(true),
            ..Certificates::default()
        },
        diagnostics: Diagnostics {
            n_interior: cfg.grid.n_interior(),
            dt: traj.dt,
            ..Diagnostics::default()
        },
        seed: cfg.params.seed,
        final_state: fin,
        trajectory: traj,
    };
    Ok((schedule, report))
}

/// Phase 1 holds `b_{θ1}` until within `ε/2` of `(θ1, 0)`; phase 2 adds `d/(T − T1)`,
/// `d = θ2/θ1`, with `T − T1` picked from `0.5·2^{−k}`, `k = 0..8`.
///
/// Phase 2 is integrated from the phase-1 end state with its own (finer) step.
pub fn two_phase_schedule(cfg: &ScenarioConfig, eps: f64) -> Result<(ControlSchedule, SteeringReport)> {
    let (theta1, theta2) = (&cfg.theta1, &cfg.theta2);
    let d = admissible_ratio(theta2, theta1, cfg.params.ratio_cap);
    if !d.admissible {
        return Err(Error::InadmissibleRatio {
            what: "d",
            sup_norm: d.sup_norm,
            cap: cfg.params.ratio_cap,
        });
    }
    check_condition_two(theta2, theta1, cfg.params.tau_cond)?;
    let cert = certify(cfg, theta1, true)?;
    let b = &cert.b.field;
    let dt = cfg.dt_for(b.sup_norm());
    let p1 = damped_phase_one(cfg, b, theta1, eps / 2.0, dt)?;
    let rest = rest_at(theta1);
    let err1 = state_norm(&(&p1.state - &rest));

    let target = cfg.target();
    let mut phase_errors = vec![PhaseError {
        phase: "stabilize".into(),
        err_h: err1,
    }];
    let mut diagnostics = Diagnostics {
        n_interior: cfg.grid.n_interior(),
        dt,
        decay_amplitude: p1.fit.map(|f| f.amplitude),
        ..Diagnostics::default()
    };
    let t1_piece = p1.t1.max(dt);
    let mut schedule = ControlSchedule::constant(b.clone(), t1_piece)?;
    let (trajectory, t_total) = if d.sup_norm == 0.0 {
        (p1.trajectory.clone(), p1.t1)
    } else {
        let lap_d = laplacian(&d.field).sup_norm();
        let mollified = lap_d > SMOOTH_D_BOUND;
        let d_eff = if mollified {
            mollify(&d.field, 5.0 * cfg.grid.hx())?
        } else {
            d.field.clone()
        };
        diagnostics.phase2_mollified = Some(mollified);
        let mut best: Option<(f64, f64, Trajectory, Field)> = None;
        for k in 0..=TAU_HALVINGS {
            let tau = 0.5 * 0.5f64.powi(k as i32);
            let v2 = b.axpy(1.0 / tau, &d_eff);
            let dt2 = cfg.dt_for(v2.sup_norm()).min(tau / 16.0);
            let sched = ControlSchedule::constant(v2.clone(), tau)?;
            let traj = simulate(&p1.state, &sched, &cfg.damping, &cfg.nonlinearity, tau, dt2, None)?;
            let err = state_norm(&(traj.final_state() - &target));
            if best.as_ref().is_none_or(|(e, ..)| err < *e) {
                best = Some((err, tau, traj, v2));
            }
        }
        let (err2, tau, traj2, v2) = best.expect("at least one candidate");
        phase_errors.push(PhaseError {
            phase: "velocity_jump".into(),
            err_h: err2,
        });
        diagnostics.phase2_duration = Some(tau);
        schedule = schedule.then(t1_piece + tau, Coefficient::Static(v2))?;
        (p1.trajectory.clone().concat(&traj2), p1.t1 + tau)
    };
    let final_state = trajectory.final_state().clone();
    let err_h = state_norm(&(&final_state - &target));
    let report = SteeringReport {
        kind: "two_phase".into(),
        err_h,
        target_norm: state_norm(&target),
        target_met: err_h <= eps,
        phase_errors,
        t1: Some(p1.t1),
        t: t_total,
        m: p1.fit.map(|f| f.m),
        sigma: p1.fit.map(|f| f.sigma),
        mu: None,
        control_sup_norm: schedule.sup_norm(),
        control_l2t_norm: schedule.l2t_norm(),
        certificates: Certificates {
            p1: Some(true),
            p2: Some(true),
            p3: Some(true),
            p3_l2: Some(cert.p3_l2.passed),
            p4: Some(true),
            cond_ii: Some(true),
            floor: None,
        },
        diagnostics,
        seed: cfg.params.seed,
        final_state,
        trajectory,
    };
    Ok((schedule, report))
}

/// `v1 = u/(ψ + θ)` on `O`, zero elsewhere, after checking `|ψ + θ| ≥ μ/2` on `O`
/// at every sample, `μ = min_O |θ|`.
#[derive(Debug, Clone)]
pub struct DivideThrough {
    pub series: TimeSeries,
    pub mu: f64,
    /// `min |ψ + θ|` over `O` and all samples.
    pub min_denominator: f64,
}

pub fn divide_through_control(
    u: &TimeSeries,
    psi: &Trajectory,
    theta_base: &Field,
    region: Interval,
) -> Result<DivideThrough> {
    if u.len() != psi.len() {
        return Err(Error::InvalidInput(format!(
            "control has {} samples, trajectory has {} levels",
            u.len(),
            psi.len()
        )));
    }
    let grid = *theta_base.grid();
    let mask = region.mask(&grid);
    let th = theta_base.values();
    let (mut mu, mut mu_node) = (f64::INFINITY, 0);
    for i in (0..th.len()).filter(|&i| mask[i]) {
        if th[i].abs() < mu {
            mu = th[i].abs();
            mu_node = i;
        }
    }
    if !mu.is_finite() || mu <= TAU_SUPP * theta_base.sup_norm() {
        return Err(Error::FloorViolated {
            node: mu_node,
            x: grid.x(mu_node),
            t: psi.times[0],
            value: mu.min(0.0).abs(),
            floor: 0.0,
        });
    }
    let floor = 0.5 * mu;
    let mut min_den = f64::INFINITY;
    let mut samples = Vec::with_capacity(u.len());
    for (k, (s, uk)) in psi.states.iter().zip(u.samples()).enumerate() {
        let mut vals = vec![0.0; th.len()];
        for i in (0..th.len()).filter(|&i| mask[i]) {
            let den = s.w.values()[i] + th[i];
            if den.abs() < floor {
                return Err(Error::FloorViolated {
                    node: i,
                    x: grid.x(i),
                    t: psi.times[k],
                    value: den.abs(),
                    floor,
                });
            }
            min_den = min_den.min(den.abs());
            vals[i] = uk.values()[i] / den;
        }
        samples.push(Field::from_vec(grid.homogeneous(), vals));
    }
    Ok(DivideThrough {
        series: TimeSeries::new(u.t0(), u.dt(), samples)?,
        mu,
        min_denominator: min_den,
    })
}

/// Outcome of the additive phase, before assembly.
struct AdditivePhase {
    /// Multiplicative correction `v1` in local time.
    v1: TimeSeries,
    /// Auxiliary trajectory `ψ` driven by the HUM control.
    phi: Trajectory,
    duration: f64,
    hum_iterations: usize,
    hum_residual: f64,
    lift_mismatch: f64,
    min_denominator: f64,
    mu: f64,
}

/// HUM null/target control for the linear auxiliary system, lifted to the damped semilinear
/// one and divided through `ψ + ζ`.
fn additive_phase(
    cfg: &ScenarioConfig,
    b: &Field,
    zeta: &Field,
    psi0: &State,
    psid: &State,
    dt: f64,
) -> Result<AdditivePhase> {
    let region = cfg.region;
    // the floor must already hold at the start; no point solving HUM otherwise
    let h0 = cfg.grid.homogeneous();
    divide_through_control(
        &TimeSeries::new(0.0, dt, vec![h0.zeros()])?,
        &Trajectory::at_rest(psi0.clone(), dt),
        zeta,
        region,
    )?;
    let mut params = hum_params(cfg);
    if region.mask(&cfg.grid).iter().all(|&m| m) {
        // distributed control sees every mode; nothing spurious to filter
        params.filter = false;
    }
    // Discrete waves near the filter cutoff travel at about half speed, so the continuous
    // control time can be too short on coarse grids; one retry with a longer window.
    let default = default_control_time(region, cfg.grid.length());
    let (hum, duration) = match hum_steer_to_target(psi0, psid, b, region, (0.0, default), dt, &params) {
        Err(Error::HumFailed { .. }) => {
            let longer = HUM_RETRY_FACTOR * default;
            (
                hum_steer_to_target(psi0, psid, b, region, (0.0, longer), dt, &params)?,
                longer,
            )
        }
        other => (other?, default),
    };
    let phi = hum.trajectory;
    let f_shift = cfg.nonlinearity.shifted(zeta);
    let lifted = lift_semilinear_control(&hum.control, &phi, &cfg.damping, &f_shift)?;

    let u_local = lifted.local_series();
    let aux = simulate(
        psi0,
        &ControlSchedule::constant(b.clone(), duration)?,
        &cfg.damping,
        &f_shift,
        duration,
        phi.dt,
        Some(&u_local),
    )?;
    let lift_mismatch = aux
        .states
        .iter()
        .zip(&phi.states)
        .map(|(a, p)| state_norm(&(a - p)))
        .fold(0.0, f64::max);

    let div = divide_through_control(&u_local, &phi, zeta, region)?;
    Ok(AdditivePhase {
        v1: div.series,
        phi,
        duration,
        hum_iterations: hum.iterations,
        hum_residual: hum.terminal_residual,
        lift_mismatch,
        min_denominator: div.min_denominator,
        mu: div.mu,
    })
}

struct Assembled {
    schedule: ControlSchedule,
    final_state: State,
    divide_mismatch: f64,
    phase2: Trajectory,
}

/// Re-simulates the original system over phase 2 under `b + v1` and compares with `ψ`.
fn verify_phase_two(
    cfg: &ScenarioConfig,
    b: &Field,
    zeta_rest: &State,
    start: &State,
    t1: f64,
    add: &AdditivePhase,
) -> Result<Assembled> {
    let phi = &add.phi;
    let v_series = add.v1.map(|_, v| b + v);
    let local = ControlSchedule::new(vec![Piece {
        t_start: 0.0,
        t_end: add.duration,
        coefficient: Coefficient::Sampled(v_series.clone()),
    }])?;
    let traj = simulate(
        start,
        &local,
        &cfg.damping,
        &cfg.nonlinearity,
        add.duration,
        phi.dt,
        None,
    )?;
    let divide_mismatch = traj
        .states
        .iter()
        .zip(&phi.states)
        .map(|(s, p)| state_norm(&(&(s - zeta_rest) - p)))
        .fold(0.0, f64::max);
    let t1_piece = t1.max(phi.dt);
    let schedule = ControlSchedule::constant(b.clone(), t1_piece)?.then(
        t1_piece + add.duration,
        Coefficient::Sampled(v_series.starting_at(t1_piece)),
    )?;
    Ok(Assembled {
        schedule,
        final_state: traj.final_state().clone(),
        divide_mismatch,
        phase2: traj,
    })
}

/// Exact steering to `(θ1, 0)`.
///
/// Damped: stabilize under `b_{θ1}` to within `ε`, then null-control the auxiliary system.
/// Undamped: the damping is dropped and a short velocity jump brings the velocity near zero
/// first. The control of the additive phase is `b_{θ1} + u/(ψ + θ1)` on `O`.
pub fn exact_steer(cfg: &ScenarioConfig, eps: f64, damped: bool) -> Result<(ControlSchedule, SteeringReport)> {
    let undamped_cfg;
    let cfg = if damped {
        cfg
    } else {
        undamped_cfg = ScenarioConfig {
            damping: cfg.grid.homogeneous().zeros(),
            ..cfg.clone()
        };
        &undamped_cfg
    };
    let theta1 = &cfg.theta1;
    let cert = certify(cfg, theta1, damped)?;
    let b = cert.b.field.clone();
    let rest = rest_at(theta1);
    let mut dt = cfg.dt_for(b.sup_norm());
    for _ in 0..3 {
        let p1 = if damped {
            damped_phase_one(cfg, &b, theta1, eps, dt)?
        } else {
            undamped_phase_one(cfg, &rest, eps)?
        };
        let psi0 = &p1.state - &rest;
        let zero = State::zeros(&cfg.grid.homogeneous());
        let add = additive_phase(cfg, &b, theta1, &psi0, &zero, dt)?;
        let needed = stable_dt(
            &cfg.grid,
            b.sup_norm() + add.v1.sup_norm(),
            cfg.nonlinearity.lipschitz(),
        );
        if needed < dt {
            dt = 0.9 * needed;
            continue;
        }
        let asm = verify_phase_two(cfg, &b, &rest, &p1.state, p1.t1, &add)?;
        let err_h = state_norm(&(&asm.final_state - &rest));
        let target_norm = state_norm(&rest);
        let floor = (cfg.grid.hx().powi(2) + asm.phase2.dt.powi(2)) * state_norm(&psi0);
        let report = SteeringReport {
            kind: if damped { "exact" } else { "exact_undamped" }.into(),
            err_h,
            target_norm,
            target_met: err_h <= 1e-2 * target_norm,
            phase_errors: vec![
                PhaseError {
                    phase: if damped { "stabilize" } else { "velocity_jump" }.into(),
                    err_h: state_norm(&psi0),
                },
                PhaseError {
                    phase: "additive".into(),
                    err_h,
                },
            ],
            t1: Some(p1.t1),
            t: p1.t1 + add.duration,
            m: p1.fit.map(|f| f.m),
            sigma: p1.fit.map(|f| f.sigma),
            mu: Some(add.mu),
            control_sup_norm: asm.schedule.sup_norm(),
            control_l2t_norm: asm.schedule.l2t_norm(),
            certificates: Certificates {
                p1: Some(true),
                p2: Some(true),
                p3: damped.then_some(true),
                p3_l2: Some(cert.p3_l2.passed),
                p4: Some(true),
                cond_ii: None,
                floor: Some(true),
            },
            diagnostics: Diagnostics {
                n_interior: cfg.grid.n_interior(),
                dt: asm.phase2.dt,
                hum_iterations: Some(add.hum_iterations),
                hum_residual: Some(add.hum_residual),
                lift_mismatch: Some(add.lift_mismatch),
                divide_through_mismatch: Some(asm.divide_mismatch),
                discretization_floor: Some(floor),
                floor_margin: Some(add.min_denominator),
                decay_amplitude: p1.fit.map(|f| f.amplitude),
                phase2_duration: Some(add.duration),
                phase2_mollified: None,
            },
            seed: cfg.params.seed,
            final_state: asm.final_state,
            trajectory: p1.trajectory.concat(&asm.phase2),
        };
        return Ok((asm.schedule, report));
    }
    Err(Error::StabilityViolation {
        dt,
        bound: stable_dt(&cfg.grid, b.sup_norm(), cfg.nonlinearity.lipschitz()),
    })
}

/// Undamped phase 1: velocity jump towards `(w1, 0)`, halving `T1` from 0.1 until within `ε`.
fn undamped_phase_one(cfg: &ScenarioConfig, rest: &State, eps: f64) -> Result<PhaseOne> {
    let y0 = &cfg.initial;
    if state_norm(&(y0 - rest)) <= eps {
        return Ok(PhaseOne {
            t1: 0.0,
            state: y0.clone(),
            trajectory: Trajectory::at_rest(y0.clone(), cfg.dt_for(0.0)),
            fit: None,
        });
    }
    let zero = cfg.grid.homogeneous().zeros();
    let mut best: Option<(f64, f64, Trajectory)> = None;
    for k in 0..=TAU_HALVINGS {
        let t1 = 0.1 * 0.5f64.powi(k as i32);
        let v = velocity_jump_control(&y0.w, &y0.wdot, &zero, t1, cfg.params.ratio_cap, cfg.params.tau_cond)?;
        let dt = cfg.dt_for(v.sup_norm()).min(t1 / 32.0);
        let sched = ControlSchedule::constant(v, t1)?;
        let traj = simulate(y0, &sched, &cfg.damping, &cfg.nonlinearity, t1, dt, None)?;
        let err = state_norm(&(traj.final_state() - rest));
        if best.as_ref().is_none_or(|(e, ..)| err < *e) {
            best = Some((err, t1, traj));
        }
        if err <= eps {
            break;
        }
    }
    let (_, t1, trajectory) = best.expect("at least one candidate");
    Ok(PhaseOne {
        t1,
        state: trajectory.final_state().clone(),
        trajectory,
        fit: None,
    })
}

/// Exact steering to `(θ1, θ2)` with Dirichlet data `(σ1, σ2)` carried by the grid of `ζ`.
/// The control region must be the whole interval.
pub fn exact_steer_nonhomogeneous(
    cfg: &ScenarioConfig,
    zeta: &Field,
    eps: f64,
) -> Result<(ControlSchedule, SteeringReport)> {
    let l = cfg.grid.length();
    if cfg.region.a > 0.0 || cfg.region.b < l {
        return Err(Error::SupportViolated {
            hypothesis: "control region must be the whole interval".into(),
        });
    }
    let (s1, s2) = zeta.grid().boundary();
    let min_abs = zeta.values().iter().fold(s1.abs().min(s2.abs()), |m, v| m.min(v.abs()));
    let max_abs = zeta.sup_norm().max(s1.abs()).max(s2.abs());
    if min_abs <= TAU_SUPP * max_abs {
        return Err(Error::ZetaVanishes {
            min: min_abs,
            max: max_abs,
        });
    }
    let cert = certify(cfg, zeta, true)?;
    let b = cert.b.field.clone();
    let rest = rest_at(zeta);
    let target = cfg.target();
    let psid = &target - &rest;
    let mut dt = cfg.dt_for(b.sup_norm());
    for _ in 0..3 {
        let p1 = damped_phase_one(cfg, &b, zeta, eps, dt)?;
        let psi0 = &p1.state - &rest;
        let add = additive_phase(cfg, &b, zeta, &psi0, &psid, dt)?;
        let needed = stable_dt(
            &cfg.grid,
            b.sup_norm() + add.v1.sup_norm(),
            cfg.nonlinearity.lipschitz(),
        );
        if needed < dt {
            dt = 0.9 * needed;
            continue;
        }
        let asm = verify_phase_two(cfg, &b, &rest, &p1.state, p1.t1, &add)?;
        let err_h = state_norm(&(&asm.final_state - &target));
        let target_norm = state_norm(&target);
        let floor = (cfg.grid.hx().powi(2) + asm.phase2.dt.powi(2)) * state_norm(&psi0).max(state_norm(&psid));
        let report = SteeringReport {
            kind: "exact_nonhomogeneous".into(),
            err_h,
            target_norm,
            target_met: err_h <= 1e-2 * target_norm,
            phase_errors: vec![
                PhaseError {
                    phase: "stabilize".into(),
                    err_h: state_norm(&psi0),
                },
                PhaseError {
                    phase: "additive".into(),
                    err_h,
                },
            ],
            t1: Some(p1.t1),
            t: p1.t1 + add.duration,
            m: p1.fit.map(|f| f.m),
            sigma: p1.fit.map(|f| f.sigma),
            mu: Some(min_abs),
            control_sup_norm: asm.schedule.sup_norm(),
            control_l2t_norm: asm.schedule.l2t_norm(),
            certificates: Certificates {
                p1: Some(true),
                p2: Some(true),
                p3: Some(true),
                p3_l2: Some(cert.p3_l2.passed),
                p4: Some(true),
                cond_ii: None,
                floor: Some(true),
            },
            diagnostics: Diagnostics {
                n_interior: cfg.grid.n_interior(),
                dt: asm.phase2.dt,
                hum_iterations: Some(add.hum_iterations),
                hum_residual: Some(add.hum_residual),
                lift_mismatch: Some(add.lift_mismatch),
                divide_through_mismatch: Some(asm.divide_mismatch),
                discretization_floor: Some(floor),
                floor_margin: Some(add.min_denominator),
                decay_amplitude: p1.fit.map(|f| f.amplitude),
                phase2_duration: Some(add.duration),
                phase2_mollified: None,
            },
            seed: cfg.params.seed,
            final_state: asm.final_state,
            trajectory: p1.trajectory.concat(&asm.phase2),
        };
        return Ok((asm.schedule, report));
    }
    Err(Error::StabilityViolation {
        dt,
        bound: stable_dt(&cfg.grid, b.sup_norm(), cfg.nonlinearity.lipschitz()),
    })
}
