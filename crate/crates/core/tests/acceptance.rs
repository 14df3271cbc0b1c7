//! Acceptance criteria 1–10. Prints one PASS/FAIL line per criterion and exits nonzero if any
//! criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use wavectl_core::approx::{bernstein_approx, check_gronwall, mollify_positive};
use wavectl_core::dynamics::{simulate, stable_dt, ControlSchedule};
use wavectl_core::experiment::{rate_study, run_experiment, ExperimentKind, ExperimentSpec, ScenarioSource};
use wavectl_core::grid::{l2_norm, state_norm, Grid1D, Interval, State};
use wavectl_core::hum::{
    default_control_time, hum_null_control, lift_semilinear_control, observability_constant, observability_quotient,
    HumParams,
};
use wavectl_core::nonlinearity::NonlinearitySpec;
use wavectl_core::scenarios::{
    certified_example33, example33_sign_reports, example_33_config, Example33Params, FieldSpec, NonlinearityFile,
    Preset, ScenarioFile,
};
use wavectl_core::synthesis::{exact_steer, stabilize, stabilizing_potential, two_phase_schedule};
use wavectl_core::{Error, SolverParams};

type Check = std::result::Result<String, String>;

fn run(id: u32, name: &str, limit_s: f64, f: impl FnOnce() -> Check) -> bool {
    let t = Instant::now();
    let out = f();
    let secs = t.elapsed().as_secs_f64();
    let (mut pass, mut detail) = match out {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if secs > limit_s {
        pass = false;
        detail.push_str(" | over time budget");
    }
    println!(
        "criterion {id:>2} [{name}]: {} ({detail}; {secs:.2} s, budget {limit_s} s)",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e2s(e: Error) -> String {
    format!("error: {e}")
}

fn example33() -> std::result::Result<wavectl_core::ScenarioConfig, String> {
    certified_example33(&Example33Params::default(), 299)
        .map(|(c, _)| c)
        .map_err(e2s)
}

fn c1_solver_fidelity() -> Check {
    let s = Preset::FreeWave.build(199).map_err(e2s)?;
    let cfg = &s.config;
    let dt = cfg.grid.hx() / 2.0;
    let sched = ControlSchedule::constant(cfg.grid.zeros(), 2.0).map_err(e2s)?;
    let traj = simulate(&cfg.initial, &sched, &cfg.damping, &cfg.nonlinearity, 2.0, dt, None).map_err(e2s)?;
    let err = state_norm(&(traj.final_state() - &cfg.initial));
    let drift = |es: &[f64]| es.iter().map(|e| (e - es[0]).abs()).fold(0.0, f64::max) / es[0];
    let stag = drift(&traj.staggered_energies());
    let central: Vec<f64> = traj.states.iter().map(wavectl_core::dynamics::energy).collect();
    let cen = drift(&central);
    verdict(
        err <= 2e-2 && stag <= 1e-3 && cen <= 1e-3,
        format!("err_H={err:.3e} <= 2e-2, scheme-energy drift={stag:.1e}, H-energy drift={cen:.1e} <= 1e-3"),
    )
}

fn c2_rate() -> Check {
    let grid = [0.1, 0.05, 0.025, 0.0125];
    let study = rate_study(|n| Ok(Preset::Theorem1.build(n)?.config), 199, &grid).map_err(e2s)?;
    let e = &study.errors;
    verdict(
        (0.8..=1.2).contains(&study.slope) && e[3] < e[0] / 4.0 && study.spatial_ok,
        format!(
            "slope={:.4} in [0.8, 1.2], err_H={:?}, err(0.0125)/err(0.1)={:.3} < 0.25, spatial err={:.1e}",
            study.slope,
            e.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            e[3] / e[0],
            study.spatial_error
        ),
    )
}

fn c3_decay() -> Check {
    let signs = example33_sign_reports(&Example33Params::default(), 299).map_err(e2s)?;
    let cfg = example33()?;
    let eps = 0.05;
    let b = stabilizing_potential(&cfg.theta1, &cfg.nonlinearity, cfg.params.ratio_cap)
        .map_err(e2s)?
        .field;
    let dt = cfg.dt_for(b.sup_norm());
    let st = stabilize(&cfg, &b, &cfg.theta1, 40.0, dt).map_err(e2s)?;
    let rest = State::new(cfg.theta1.clone(), cfg.grid.zeros()).map_err(e2s)?;
    let z0 = state_norm(&(&cfg.initial - &rest));
    let fit = st.fit;
    let t1 = (2.0 * fit.m * z0 / eps).ln() / fit.sigma;
    let traj = &st.trajectory;
    let k = ((t1 / traj.dt).ceil() as usize).min(traj.len() - 1);
    let zt1 = state_norm(&(&traj.states[k] - &rest));
    verdict(
        fit.sigma > 0.0 && t1 <= 40.0 && zt1 <= eps,
        format!(
            "sigma={:.4} > 0, M={:.4}, T1={t1:.3}, ‖z(T1)‖={zt1:.3e} <= {eps}; dissipativity: as printed {}, flipped {}",
            fit.sigma,
            fit.m,
            if signs[0].report.passed { "passes" } else { "fails" },
            if signs[1].report.passed { "passes" } else { "fails" },
        ),
    )
}

fn c4_two_phase() -> Check {
    let cfg = example33()?;
    let (_, r) = two_phase_schedule(&cfg, 0.05).map_err(e2s)?;
    verdict(
        r.err_h <= 0.05 + 2e-2,
        format!(
            "err_H={:.4e} <= 0.07, T1={:.3}, T={:.4}",
            r.err_h,
            r.t1.unwrap_or(0.0),
            r.t
        ),
    )
}

fn c5_hum() -> Check {
    let s = Preset::HumUnit.build(199).map_err(e2s)?;
    let cfg = &s.config;
    let z0 = &cfg.initial;
    let region = Interval::new(0.2, 0.8).map_err(e2s)?;
    let dt = stable_dt(&cfg.grid, 0.0, 0.0);
    let zero = cfg.grid.zeros();
    let p = HumParams::default();
    let sol = hum_null_control(z0, &zero, region, (0.0, 2.5), dt, &p).map_err(e2s)?;
    let sol2 = hum_null_control(&z0.scale(2.0), &zero, region, (0.0, 2.5), dt, &p).map_err(e2s)?;
    // independent re-simulation with the control as a source term
    let sched = ControlSchedule::constant(zero.clone(), 2.5).map_err(e2s)?;
    let fwd = simulate(
        z0,
        &sched,
        &zero,
        &NonlinearitySpec::zero(),
        2.5,
        dt,
        Some(&sol.control.series),
    )
    .map_err(e2s)?;
    let resid = state_norm(fwd.final_state());
    let tol = 1e-3 * state_norm(z0);
    let ratio = sol2.control.l2t_norm / sol.control.l2t_norm;
    verdict(
        resid <= tol && sol.iterations <= 400 && (ratio / 2.0 - 1.0).abs() <= 0.01,
        format!(
            "residual={resid:.3e} <= {tol:.3e}, iterations={}, l2t(2z0)/l2t(z0)={ratio:.6}",
            sol.iterations
        ),
    )
}

fn c6_exact() -> Check {
    let cfg = example33()?;
    let (_, r) = exact_steer(&cfg, 0.05, true).map_err(e2s)?;
    let mu = r.mu.ok_or("no floor reported")?;
    let t1 = r.t1.unwrap_or(0.0);
    let mask = cfg.region.mask(&cfg.grid);
    let min_w = r
        .trajectory
        .times
        .iter()
        .zip(&r.trajectory.states)
        .filter(|(t, _)| **t >= t1 - 1e-9)
        .flat_map(|(_, s)| {
            s.w.values()
                .iter()
                .zip(&mask)
                .filter(|(_, m)| **m)
                .map(|(v, _)| v.abs())
        })
        .fold(f64::INFINITY, f64::min);
    let d = &r.diagnostics;
    let mismatch = d.divide_through_mismatch.unwrap_or(f64::INFINITY);
    let floor = d.discretization_floor.unwrap_or(0.0);
    let target = 1e-2 * r.target_norm;
    verdict(
        r.err_h <= target && min_w >= mu / 2.0 && mismatch <= 10.0 * floor,
        format!(
            "err_H={:.3e} <= {target:.3e}, min_O|ψ+θ1|={min_w:.4} >= μ/2={:.4}, divide-through mismatch={mismatch:.2e} <= 10×{floor:.2e}",
            r.err_h,
            mu / 2.0
        ),
    )
}

fn c7_lift() -> Check {
    let cfg = example33()?;
    let g = cfg.grid;
    let b = stabilizing_potential(&cfg.theta1, &cfg.nonlinearity, cfg.params.ratio_cap)
        .map_err(e2s)?
        .field;
    let bump = g.sample(|x| {
        let r = (x - 1.5) / 0.4;
        if r.abs() < 1.0 {
            0.2 * (0.5 * PI * r).cos().powi(2)
        } else {
            0.0
        }
    });
    let z0 = State::new(bump, g.zeros()).map_err(e2s)?;
    let dt = cfg.dt_for(b.sup_norm());
    // past the continuous control time: discrete waves near the filter cutoff are slow
    let t = default_control_time(cfg.region, g.length()) + 0.7;
    let sol = hum_null_control(&z0, &b, cfg.region, (0.0, t), dt, &HumParams::default()).map_err(e2s)?;
    let phi = &sol.trajectory;
    let k = cfg.nonlinearity.shifted(&cfg.theta1);
    let k_max = phi.states.iter().map(|s| k.apply(&s.w).sup_norm()).fold(0.0, f64::max);
    let lifted = lift_semilinear_control(&sol.control, phi, &cfg.damping, &k).map_err(e2s)?;
    let sched = ControlSchedule::constant(b.clone(), t).map_err(e2s)?;
    let aux = simulate(&z0, &sched, &cfg.damping, &k, t, phi.dt, Some(&lifted.local_series())).map_err(e2s)?;
    let max_err = aux
        .states
        .iter()
        .zip(&phi.states)
        .map(|(a, p)| state_norm(&(a - p)))
        .fold(0.0, f64::max);
    let terminal = state_norm(&(aux.final_state() - phi.final_state()));
    let floor = (g.hx().powi(2) + phi.dt.powi(2)) * state_norm(&z0);
    verdict(
        max_err <= 10.0 * floor && terminal <= 10.0 * floor,
        format!("max_t‖ψ−φ‖={max_err:.2e}, terminal gap={terminal:.2e} <= 10×{floor:.2e}, max|k(φ)|={k_max:.3e}"),
    )
}

fn c8_toolbox() -> Check {
    let (a, bc) = (1.5, 0.7);
    let n = 20_000;
    let ts: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let phi: Vec<f64> = ts.iter().map(|t| a * (bc * t).exp()).collect();
    let gr = check_gronwall(&ts, &phi, a, bc, 1e-6).map_err(e2s)?;
    let gron_ok = gr.hypothesis_gap.abs() <= 1e-6 && gr.bound_gap.abs() <= 1e-6;

    let lin: Vec<f64> = (0..=10).map(|k| 2.0 - 3.0 * k as f64 / 10.0).collect();
    let lin_err = [0.0, 0.3, 0.77, 1.0]
        .iter()
        .map(|&t| (bernstein_approx(&lin, t).unwrap().0 - (2.0 - 3.0 * t)).abs())
        .fold(0.0, f64::max);
    let sq: Vec<f64> = (0..=10).map(|k| (k as f64 / 10.0).powi(2)).collect();
    let mono = (bernstein_approx(&sq, 0.5).map_err(e2s)?.0 - 0.275).abs();
    let cub: Vec<f64> = (0..=10).map(|k| (3.0 * k as f64 / 10.0).sin()).collect();
    let h = 1e-5;
    let der_err = [0.2, 0.5, 0.9]
        .iter()
        .map(|&t| {
            let d = bernstein_approx(&cub, t).unwrap().1;
            let fd = (bernstein_approx(&cub, t + h).unwrap().0 - bernstein_approx(&cub, t - h).unwrap().0) / (2.0 * h);
            (d - fd).abs()
        })
        .fold(0.0, f64::max);
    let bern_ok = lin_err <= 1e-12 && mono <= 1e-12 && der_err <= 1e-6;

    let grid = Grid1D::new(3.0, 2999).map_err(e2s)?;
    let ind = Interval::new(1.0, 2.0).map_err(e2s)?.indicator(&grid);
    let mut errs = Vec::new();
    let mut positive = true;
    let mut bounded = true;
    for r in [0.2, 0.1, 0.05, 0.025] {
        let m = mollify_positive(&ind, r).map_err(e2s)?;
        positive &= m.values().iter().all(|v| *v > 0.0);
        bounded &= m.sup_norm() <= ind.sup_norm() + r / (r + 1.0) + 1e-12;
        errs.push(l2_norm(&(&m - &ind)));
    }
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let moll_ok = positive && bounded && decreasing;
    verdict(
        gron_ok && bern_ok && moll_ok,
        format!(
            "gronwall gaps=({:.1e}, {:.1e}); bernstein lin={lin_err:.1e}, B10(t²)(0.5) err={mono:.1e}, derivative err={der_err:.1e}; mollifier positive={positive}, bounded={bounded}, L2 errors={:?}",
            gr.hypothesis_gap,
            gr.bound_gap,
            errs.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn c9_observability() -> Check {
    let g = Grid1D::new(1.0, 199).map_err(e2s)?;
    let dt = stable_dt(&g, 0.0, 0.0);
    let s = g.sine_mode(1);
    let phi0 = State::new(s.clone(), g.zeros()).map_err(e2s)?;
    let phi0 = phi0.scale(1.0 / state_norm(&phi0));
    let q =
        observability_quotient(&phi0, &g.zeros(), &g.constant(1.0), &NonlinearitySpec::zero(), 2.0, dt).map_err(e2s)?;
    let g3 = Grid1D::new(3.0, 299).map_err(e2s)?;
    let h = Interval::new(0.9, 2.1).map_err(e2s)?.indicator(&g3);
    let rep = observability_constant(&g3.zeros(), &h, &NonlinearitySpec::zero(), 6.0, 16, 0x5eed).map_err(e2s)?;
    verdict(
        (q - 1.0).abs() <= 2e-2 && rep.delta_estimate > 0.0,
        format!(
            "eigenmode quotient={q:.5}, δ estimate={:.4e} > 0 over {} data",
            rep.delta_estimate, rep.sample_count
        ),
    )
}

fn expect_failure(
    tmp: &std::path::Path,
    label: &str,
    kind: ExperimentKind,
    scenario: ScenarioSource,
    tweak: impl FnOnce(&mut ExperimentSpec),
    want: fn(&Error) -> bool,
    code: i32,
) -> std::result::Result<String, String> {
    let out = tmp.join(label);
    let mut spec = ExperimentSpec::new(kind, scenario, &out);
    tweak(&mut spec);
    match run_experiment(&spec) {
        Ok(_) => Err(format!("{label}: unexpectedly succeeded")),
        Err(e) => {
            let name = format!("{e:?}")
                .split(['{', '(', ' '])
                .next()
                .unwrap_or_default()
                .to_string();
            if !want(&e) || e.exit_code() != code {
                Err(format!("{label}: wrong error {name} (exit {})", e.exit_code()))
            } else if out.exists() {
                Err(format!("{label}: output directory was created"))
            } else {
                Ok(format!("{label}→{name}/{code}"))
            }
        }
    }
}

fn unit_file(w0: FieldSpec, theta1: FieldSpec, theta2: FieldSpec, nonlinearity: NonlinearityFile) -> ScenarioSource {
    ScenarioSource::Inline(Box::new(ScenarioFile {
        length: 1.0,
        boundary: (0.0, 0.0),
        damping: FieldSpec::Constant(0.0),
        nonlinearity,
        w0,
        w1: FieldSpec::Constant(0.0),
        theta1,
        theta2,
        region: Interval::new(0.2, 0.8).unwrap(),
        zeta: None,
        params: SolverParams::default(),
    }))
}

fn c10_certificates() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let tmp = tmp.path();
    let n = 49;
    let g = Grid1D::new(1.0, n).map_err(e2s)?;
    let hole: Vec<f64> = g
        .nodes()
        .iter()
        .map(|x| ((x - 0.5).abs() - 0.1).max(0.0).powi(2))
        .collect();
    let sine2 = FieldSpec::Sine {
        mode: 2,
        amplitude: 1.0,
    };
    let mut results = Vec::new();

    results.push(expect_failure(
        tmp,
        "condition-ii",
        ExperimentKind::SteerShortTime,
        unit_file(
            FieldSpec::Values(hole.clone()),
            FieldSpec::Values(hole),
            FieldSpec::Indicator {
                a: 0.45,
                b: 0.55,
                value: 1.0,
            },
            NonlinearityFile::Zero,
        ),
        |s| {
            s.n_interior = Some(n);
            s.t_steer = Some(0.1);
        },
        |e| matches!(e, Error::ConditionTwoViolated { .. }),
        3,
    ));
    results.push(expect_failure(
        tmp,
        "dissipativity",
        ExperimentKind::SteerTwoPhase,
        unit_file(
            sine2.clone(),
            sine2.clone(),
            FieldSpec::Constant(0.0),
            NonlinearityFile::Zero,
        ),
        |s| {
            s.n_interior = Some(n);
            s.eps = Some(0.05);
        },
        |e| matches!(e, Error::P3Violated { .. }),
        3,
    ));
    let half = FieldSpec::Indicator {
        a: 0.0,
        b: 0.5,
        value: 1.0,
    };
    results.push(expect_failure(
        tmp,
        "zero-set",
        ExperimentKind::SteerTwoPhase,
        unit_file(
            half.clone(),
            half,
            FieldSpec::Constant(0.0),
            NonlinearityFile::Affine { c0: 1.0, c1: 0.5 },
        ),
        |s| {
            s.n_interior = Some(n);
            s.eps = Some(0.05);
        },
        |e| matches!(e, Error::P4Violated { .. }),
        3,
    ));
    let mut capped = unit_file(
        FieldSpec::Quadratic {
            c0: 0.0,
            c1: 1.0,
            c2: -1.0,
        },
        FieldSpec::Constant(0.0),
        FieldSpec::Constant(1.0),
        NonlinearityFile::Zero,
    );
    if let ScenarioSource::Inline(f) = &mut capped {
        f.params.ratio_cap = 10.0;
    }
    results.push(expect_failure(
        tmp,
        "ratio-cap",
        ExperimentKind::SteerShortTime,
        capped,
        |s| {
            s.n_interior = Some(n);
            s.t_steer = Some(0.1);
        },
        |e| matches!(e, Error::InadmissibleRatio { .. }),
        3,
    ));
    let cfg = example33()?;
    let mask = cfg.region.mask(&cfg.grid);
    let mu = cfg
        .theta1
        .values()
        .iter()
        .zip(&mask)
        .filter(|(_, m)| **m)
        .map(|(v, _)| v.abs())
        .fold(f64::INFINITY, f64::min);
    results.push(expect_failure(
        tmp,
        "floor",
        ExperimentKind::SteerExact,
        ScenarioSource::Preset(Preset::Example33),
        |s| s.eps = Some(10.0 * mu),
        |e| matches!(e, Error::FloorViolated { .. }),
        6,
    ));
    let bad = Example33Params {
        a: 1.2,
        ..Example33Params::default()
    };
    results.push(match example_33_config(&bad, 299) {
        Err(e @ Error::ParamViolation(_)) if e.exit_code() == 3 => Ok("example-params→ParamViolation/3".into()),
        other => Err(format!("example-params: unexpected {:?}", other.map(|_| ()))),
    });

    let ok = results.iter().all(|r| r.is_ok());
    let names: Vec<String> = results.into_iter().map(|r| r.unwrap_or_else(|e| e)).collect();
    let variants: std::collections::BTreeSet<&str> = names
        .iter()
        .filter_map(|s| s.split('→').nth(1)?.split('/').next())
        .collect();
    verdict(ok && variants.len() == names.len(), names.join(", "))
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags such as `--nocapture`; listing mode prints nothing
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let results = [
        run(1, "solver fidelity", 1.0, c1_solver_fidelity),
        run(2, "short-time rate", 30.0, c2_rate),
        run(3, "stabilization decay", 60.0, c3_decay),
        run(4, "two-phase steering", 90.0, c4_two_phase),
        run(5, "HUM null control", 60.0, c5_hum),
        run(6, "exact steering", 180.0, c6_exact),
        run(7, "semilinear lift", 60.0, c7_lift),
        run(8, "approximation toolbox", 10.0, c8_toolbox),
        run(9, "observability", 30.0, c9_observability),
        run(10, "certificate soundness", 10.0, c10_certificates),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
