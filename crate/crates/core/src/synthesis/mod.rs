//! Multiplicative control synthesis.

pub mod certificates;
pub mod decay;
pub mod ratio;
pub mod report;
pub mod steer;

pub use certificates::{
    check_dissipativity, gamma, lipschitz_threshold, DissipativityForm, DissipativityReport, SamplingParams,
};
pub use decay::{estimate_decay, estimate_decay_from_norms, DecayFit};
pub use ratio::{
    admissible_ratio, check_condition_two, check_zero_set, stabilizing_potential, velocity_jump_control, RatioField,
    RATIO_CAP, TAU_COND,
};
pub use report::{Certificates, Diagnostics, PhaseError, SteeringReport};
pub use steer::{
    divide_through_control, exact_steer, exact_steer_nonhomogeneous, short_time_steer, stabilize, two_phase_schedule,
    DivideThrough, Stabilization,
};
