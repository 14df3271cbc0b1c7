//! Shared fixtures for the criterion benches.

use std::f64::consts::PI;

use wavectl_core::{Grid1D, State};

/// Unit-interval grid with `n` interior nodes.
pub fn grid(n: usize) -> Grid1D {
    Grid1D::new(1.0, n).expect("valid grid")
}

/// Two-mode datum `(sin πx + 0.3 sin 3πx, 0.5 sin 2πx)`.
pub fn datum(grid: &Grid1D) -> State {
    let w = grid.sample(|x| (PI * x).sin() + 0.3 * (3.0 * PI * x).sin());
    let v = grid.sample(|x| 0.5 * (2.0 * PI * x).sin());
    State::new(w, v).expect("matching grids")
}
