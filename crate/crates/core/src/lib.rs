//! Multiplicative (bilinear) control of one-dimensional semilinear wave equations.
//!
//! The state `(w, w_t)` of `w_tt = w_xx + v(x,t)·w − h(x)·w_t + f(w)` on `(0, l)` is steered by
//! the coefficient `v`. Modules: [`grid`] (mesh, fields, norms), [`dynamics`] (leapfrog
//! solver), [`synthesis`] (control laws and certificates), [`hum`] (additive controls and
//! observability), [`approx`] (Gronwall, Bernstein, mollifier), [`scenarios`] and
//! [`experiment`] (canned setups and the report harness).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod hum;
pub mod nonlinearity;
pub mod scenarios;
pub mod synthesis;

pub use dynamics::{simulate, ControlSchedule, ScenarioConfig, SolverParams, TimeSeries, Trajectory};
pub use error::{Error, ErrorClass, Result};
pub use grid::{state_norm, Field, Grid1D, Interval, State};
pub use nonlinearity::{BumpSign, NonlinearitySpec};
