//! Uniform 1-D grid on `(0, l)`, nodal fields and the norms of `H = H¹₀ × L²`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative threshold defining the numerical support `Λ(ξ)`.
pub const TAU_SUPP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    length: f64,
    n_interior: usize,
    boundary: (f64, f64),
}

impl Grid1D {
    pub fn new(length: f64, n_interior: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidInput(format!(
                "grid length must be positive, got {length}"
            )));
        }
        if n_interior < 3 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 3 interior nodes, got {n_interior}"
            )));
        }
        Ok(Self {
            length,
            n_interior,
            boundary: (0.0, 0.0),
        })
    }

    /// Same grid with Dirichlet values `(σ1, σ2)` at `x = 0` and `x = l`.
    pub fn with_boundary(mut self, sigma1: f64, sigma2: f64) -> Self {
        self.boundary = (sigma1, sigma2);
        self
    }

    pub fn homogeneous(mut self) -> Self {
        self.boundary = (0.0, 0.0);
        self
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn boundary(&self) -> (f64, f64) {
        self.boundary
    }

    pub fn is_homogeneous(&self) -> bool {
        self.boundary == (0.0, 0.0)
    }

    pub fn hx(&self) -> f64 {
        self.length / (self.n_interior + 1) as f64
    }

    /// Coordinate of interior node `i` (0-based).
    pub fn x(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.hx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_interior).map(|i| self.x(i)).collect()
    }

    /// Two grids carry compatible fields when they discretize the same interval.
    pub fn same_mesh(&self, other: &Grid1D) -> bool {
        self.n_interior == other.n_interior && self.length == other.length
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: *self,
            values: (0..self.n_interior).map(|i| f(self.x(i))).collect(),
        }
    }

    pub fn zeros(&self) -> Field {
        self.constant(0.0)
    }

    pub fn constant(&self, c: f64) -> Field {
        Field {
            grid: *self,
            values: vec![c; self.n_interior],
        }
    }

    /// `sin(mπx/l)` sampled at the interior nodes; an exact eigenvector of [`laplacian`].
    pub fn sine_mode(&self, m: usize) -> Field {
        let l = self.length;
        self.homogeneous()
            .sample(|x| (m as f64 * std::f64::consts::PI * x / l).sin())
    }

    /// Eigenvalue of `−Δ_h` for [`Grid1D::sine_mode`] `m`.
    pub fn sine_eigenvalue(&self, m: usize) -> f64 {
        let hx = self.hx();
        let s = (m as f64 * std::f64::consts::PI * hx / (2.0 * self.length)).sin();
        4.0 * s * s / (hx * hx)
    }
}

/// Nodal values at the interior points of a grid. Boundary values live on the grid.
#[derive(Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("sup", &self.sup_norm())
            .finish()
    }
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_interior() {
            return Err(Error::InvalidInput(format!(
                "field has {} values, grid has {} interior nodes",
                values.len(),
                grid.n_interior()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite field value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    /// Internal constructor; callers guarantee the length.
    pub(crate) fn from_vec(grid: Grid1D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_interior());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_grid(mut self, grid: Grid1D) -> Self {
        assert!(self.grid.same_mesh(&grid), "grid mismatch");
        self.grid = grid;
        self
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_vec(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert!(self.grid.same_mesh(&other.grid), "grid mismatch");
        Field::from_vec(
            self.grid.homogeneous(),
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    /// Pointwise product; the result carries homogeneous boundary values.
    pub fn mul_pointwise(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Nodal mask of `Λ(ξ) = {|ξ| > τ_supp · max|ξ|}`.
    pub fn support(&self) -> Vec<bool> {
        let cut = TAU_SUPP * self.sup_norm();
        self.values.iter().map(|v| cut > 0.0 && v.abs() > cut).collect()
    }

    pub fn masked(&self, mask: &[bool]) -> Field {
        Field::from_vec(
            self.grid.homogeneous(),
            self.values
                .iter()
                .zip(mask)
                .map(|(&v, &m)| if m { v } else { 0.0 })
                .collect(),
        )
    }

    fn combine(&self, other: &Field, alpha: f64, beta: f64) -> Field {
        assert!(self.grid.same_mesh(&other.grid), "grid mismatch");
        let (a1, a2) = self.grid.boundary();
        let (b1, b2) = other.grid.boundary();
        let grid = self.grid.with_boundary(alpha * a1 + beta * b1, alpha * a2 + beta * b2);
        Field::from_vec(
            grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| alpha * a + beta * b)
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Field {
        let (a1, a2) = self.grid.boundary();
        Field::from_vec(
            self.grid.with_boundary(s * a1, s * a2),
            self.values.iter().map(|v| s * v).collect(),
        )
    }

    /// `self + s·other`, boundary values included.
    pub fn axpy(&self, s: f64, other: &Field) -> Field {
        self.combine(other, 1.0, s)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.combine(rhs, 1.0, 1.0)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.combine(rhs, 1.0, -1.0)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scale(rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

/// A point of `H¹₀ × L²`: displacement and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub w: Field,
    pub wdot: Field,
}

impl State {
    pub fn new(w: Field, wdot: Field) -> Result<Self> {
        if !w.grid().same_mesh(wdot.grid()) {
            return Err(Error::InvalidInput("state components live on different grids".into()));
        }
        Ok(Self { w, wdot })
    }

    pub fn zeros(grid: &Grid1D) -> Self {
        Self {
            w: grid.zeros(),
            wdot: grid.homogeneous().zeros(),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        self.w.grid()
    }

    pub fn scale(&self, s: f64) -> State {
        State {
            w: self.w.scale(s),
            wdot: self.wdot.scale(s),
        }
    }

    pub fn axpy(&self, s: f64, other: &State) -> State {
        State {
            w: self.w.axpy(s, &other.w),
            wdot: self.wdot.axpy(s, &other.wdot),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.wdot.is_finite()
    }
}

impl Sub for &State {
    type Output = State;
    fn sub(self, rhs: &State) -> State {
        State {
            w: &self.w - &rhs.w,
            wdot: &self.wdot - &rhs.wdot,
        }
    }
}

impl Add for &State {
    type Output = State;
    fn add(self, rhs: &State) -> State {
        State {
            w: &self.w + &rhs.w,
            wdot: &self.wdot + &rhs.wdot,
        }
    }
}

/// 3-point Laplacian using the grid's boundary values as ghost nodes.
pub fn laplacian(u: &Field) -> Field {
    let mut out = vec![0.0; u.len()];
    laplacian_into(u.values(), u.grid(), &mut out);
    Field::from_vec(u.grid().homogeneous(), out)
}

pub(crate) fn laplacian_into(u: &[f64], grid: &Grid1D, out: &mut [f64]) {
    let n = u.len();
    let inv = 1.0 / (grid.hx() * grid.hx());
    let (s1, s2) = grid.boundary();
    for i in 0..n {
        let left = if i == 0 { s1 } else { u[i - 1] };
        let right = if i + 1 == n { s2 } else { u[i + 1] };
        out[i] = (left - 2.0 * u[i] + right) * inv;
    }
}

pub fn l2_inner(u: &Field, v: &Field) -> f64 {
    dot(u.values(), v.values()) * u.grid().hx()
}

pub fn l2_norm(u: &Field) -> f64 {
    l2_inner(u, u).sqrt()
}

/// Discrete `H¹₀` inner product over all `n + 1` edges, boundary edges included.
pub fn h01_inner(u: &Field, v: &Field) -> f64 {
    let hx = u.grid().hx();
    let (a1, a2) = u.grid().boundary();
    let (b1, b2) = v.grid().boundary();
    let (uv, vv) = (u.values(), v.values());
    let n = uv.len();
    let mut acc = (uv[0] - a1) * (vv[0] - b1) + (a2 - uv[n - 1]) * (b2 - vv[n - 1]);
    for i in 0..n - 1 {
        acc += (uv[i + 1] - uv[i]) * (vv[i + 1] - vv[i]);
    }
    acc / hx
}

pub fn h01_norm(u: &Field) -> f64 {
    h01_inner(u, u).max(0.0).sqrt()
}

pub fn state_inner(a: &State, b: &State) -> f64 {
    h01_inner(&a.w, &b.w) + l2_inner(&a.wdot, &b.wdot)
}

pub fn state_norm(y: &State) -> f64 {
    (h01_norm(&y.w).powi(2) + l2_norm(&y.wdot).powi(2)).sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Open interval `(a, b)`, used both as a spatial region and as a value range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput(format!("interval ({a}, {b}) is empty")));
        }
        Ok(Self { a, b })
    }

    pub fn contains(&self, s: f64) -> bool {
        self.a < s && s < self.b
    }

    pub fn mask(&self, grid: &Grid1D) -> Vec<bool> {
        (0..grid.n_interior()).map(|i| self.contains(grid.x(i))).collect()
    }

    pub fn indicator(&self, grid: &Grid1D) -> Field {
        grid.homogeneous().sample(|x| if self.contains(x) { 1.0 } else { 0.0 })
    }

    pub fn within(&self, lo: f64, hi: f64) -> bool {
        lo <= self.a && self.b <= hi
    }
}

/// Discrete sine transform (DST-I) on `n` interior nodes, backed by a complex FFT of size `2(n+1)`.
#[derive(Clone)]
pub struct SineBasis {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SineBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SineBasis").field("n", &self.n).finish()
    }
}

impl SineBasis {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        Self { n, fft }
    }

    /// `X_k = Σ_j x_j sin(π j k / (n+1))` for `k = 1..=n` (stored at `k-1`).
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let m = 2 * (n + 1);
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1].re = v;
            buf[m - j - 1].re = -v;
        }
        self.fft.process(&mut buf);
        (1..=n).map(|k| -0.5 * buf[k].im).collect()
    }

    pub fn inverse(&self, coeffs: &[f64]) -> Vec<f64> {
        let s = 2.0 / (self.n + 1) as f64;
        self.forward(coeffs).into_iter().map(|v| v * s).collect()
    }

    /// Orthogonal projection onto the lowest `modes` sine modes.
    pub fn project(&self, x: &[f64], modes: usize) -> Vec<f64> {
        if modes >= self.n {
            return x.to_vec();
        }
        let mut c = self.forward(x);
        c[modes..].iter_mut().for_each(|v| *v = 0.0);
        self.inverse(&c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Grid1D {
        Grid1D::new(1.0, n).unwrap()
    }

    #[test]
    fn laplacian_exact_on_quadratic() {
        let g = unit(17);
        let lap = laplacian(&g.sample(|x| x * (1.0 - x)));
        for v in lap.values() {
            assert_abs_diff_eq!(*v, -2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn laplacian_of_sine_matches_second_derivative() {
        let g = unit(199);
        let lap = laplacian(&g.sample(|x| (PI * x).sin()));
        let err = (0..199)
            .map(|i| (lap.values()[i] + PI * PI * (PI * g.x(i)).sin()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3, "err {err}");
        assert!(err <= PI.powi(4) / 12.0 * g.hx().powi(2) * 1.01);
    }

    #[test]
    fn laplacian_uses_ghost_boundary() {
        let g = unit(9).with_boundary(1.0, 1.0);
        let lap = laplacian(&g.constant(1.0));
        assert!(lap.sup_norm() < 1e-9);
    }

    #[test]
    fn norms_of_reference_fields() {
        let g = unit(199);
        assert_abs_diff_eq!(
            h01_norm(&g.sample(|x| x * (1.0 - x))),
            1.0 / 3f64.sqrt(),
            epsilon = 1e-3
        );
        assert_abs_diff_eq!(
            h01_norm(&g.sample(|x| (PI * x).sin())),
            PI / 2f64.sqrt(),
            epsilon = 1e-2
        );
        assert_eq!(h01_norm(&g.zeros()), 0.0);
        // the rectangle rule drops one cell's worth of mass, so (0, 1) needs a finer grid
        let g = unit(1999);
        let y = State::new(g.zeros(), g.constant(1.0)).unwrap();
        assert_abs_diff_eq!(state_norm(&y), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn summation_by_parts() {
        let g = unit(31);
        let u = g.sample(|x| (3.0 * x).exp() * x * (1.0 - x) + x.sin());
        let lhs = -l2_inner(&laplacian(&u), &u);
        // u does not vanish at x = 1 in its formula, but the grid forces zero ghost values
        assert_abs_diff_eq!(lhs, h01_norm(&u).powi(2), epsilon = 1e-9 * lhs.abs());
    }

    #[test]
    fn sine_mode_is_eigenvector() {
        let g = unit(40);
        for m in [1, 5, 17] {
            let s = g.sine_mode(m);
            let lap = laplacian(&s);
            let lam = g.sine_eigenvalue(m);
            for (a, b) in lap.values().iter().zip(s.values()) {
                assert_abs_diff_eq!(*a, -lam * b, epsilon = 1e-8 * lam);
            }
        }
    }

    #[test]
    fn dst_roundtrip_and_projection() {
        let n = 23;
        let g = unit(n);
        let basis = SineBasis::new(n);
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 % 5) as f64) - 1.3).collect();
        let back = basis.inverse(&basis.forward(&x));
        for (a, b) in x.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let mix = &(&g.sine_mode(2) * 3.0) + &g.sine_mode(20);
        let p = basis.project(mix.values(), 10);
        for (a, b) in p.iter().zip(g.sine_mode(2).values()) {
            assert_abs_diff_eq!(*a, 3.0 * b, epsilon = 1e-12);
        }
    }

    #[test]
    fn support_threshold() {
        let g = unit(9);
        let f = g.sample(|x| if x < 0.5 { 0.0 } else { 1.0 });
        let s = f.support();
        assert!(!s[0] && s[8]);
        assert!(g.zeros().support().iter().all(|m| !m));
    }

    #[test]
    fn interval_is_open() {
        let o = Interval::new(0.2, 0.8).unwrap();
        assert!(!o.contains(0.2) && o.contains(0.5) && !o.contains(0.8));
        assert!(Interval::new(1.0, 1.0).is_err());
    }
}
