use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::grid::State;

#[derive(Debug, Clone, Serialize)]
pub struct PhaseError {
    pub phase: String,
    #[serde(rename = "err_H")]
    pub err_h: f64,
}

/// Hypothesis checks; `None` means the check does not apply to the pipeline.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Certificates {
    pub p1: Option<bool>,
    pub p2: Option<bool>,
    /// Energy form `⟨Δy + b·y + f(y), y⟩ ≤ 0`; this is what the pipelines gate on.
    pub p3: Option<bool>,
    /// Literal `⟨f(y) + b·y, y⟩_{L²} ≤ 0`, recorded for reference.
    pub p3_l2: Option<bool>,
    pub p4: Option<bool>,
    pub cond_ii: Option<bool>,
    pub floor: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub n_interior: usize,
    pub dt: f64,
    pub hum_iterations: Option<usize>,
    pub hum_residual: Option<f64>,
    /// `max_t ‖ψ_lifted(t) − φ(t)‖_H` for the semilinear re-simulation.
    pub lift_mismatch: Option<f64>,
    /// `max_t ‖(w(t) − θ) − ψ(t)‖_H` for the multiplicative re-simulation.
    pub divide_through_mismatch: Option<f64>,
    /// `(h_x² + dt²)·‖ψ(T1)‖_H`.
    pub discretization_floor: Option<f64>,
    /// `min |ψ + θ|` over `O` and all samples.
    pub floor_margin: Option<f64>,
    pub decay_amplitude: Option<f64>,
    pub phase2_duration: Option<f64>,
    pub phase2_mollified: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SteeringReport {
    pub kind: String,
    #[serde(rename = "err_H")]
    pub err_h: f64,
    pub target_norm: f64,
    pub target_met: bool,
    pub phase_errors: Vec<PhaseError>,
    #[serde(rename = "T1")]
    pub t1: Option<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub sigma: Option<f64>,
    pub mu: Option<f64>,
    pub control_sup_norm: f64,
    pub control_l2t_norm: f64,
    pub certificates: Certificates,
    pub diagnostics: Diagnostics,
    pub seed: u64,
    #[serde(skip)]
    pub final_state: State,
    /// All phases, concatenated in time.
    #[serde(skip)]
    pub trajectory: Trajectory,
}

impl SteeringReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
