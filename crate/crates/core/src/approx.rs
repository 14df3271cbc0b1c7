//! Gronwall bound, Bernstein polynomials and positive mollification.

use std::sync::OnceLock;

use quadrature::double_exponential;

use crate::error::{Error, Result};
use crate::grid::Field;

/// `a·e^{bt}`.
pub fn gronwall_bound(a: f64, b: f64, t: f64) -> f64 {
    a * (b * t).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallCheck {
    /// `max_k φ(t_k) − (a + b∫_0^{t_k} φ)`; nonpositive when the hypothesis holds.
    pub hypothesis_gap: f64,
    /// `max_k φ(t_k) − a·e^{b t_k}`; nonpositive when the bound holds.
    pub bound_gap: f64,
    pub hypothesis_holds: bool,
    pub bound_holds: bool,
}

/// Checks the integral hypothesis and the exponential bound on sampled `φ`, using the
/// trapezoid rule for the running integral. Both comparisons allow slack `tol`.
pub fn check_gronwall(times: &[f64], phi: &[f64], a: f64, b: f64, tol: f64) -> Result<GronwallCheck> {
    if times.len() != phi.len() || times.is_empty() {
        return Err(Error::InvalidInput(
            "times and samples must be nonempty and aligned".into(),
        ));
    }
    if a < 0.0 || b < 0.0 {
        return Err(Error::InvalidInput("Gronwall constants must be nonnegative".into()));
    }
    let mut integral = 0.0;
    let mut hyp = f64::NEG_INFINITY;
    let mut bound = f64::NEG_INFINITY;
    for k in 0..times.len() {
        if k > 0 {
            integral += 0.5 * (phi[k] + phi[k - 1]) * (times[k] - times[k - 1]);
        }
        let t = times[k] - times[0];
        hyp = hyp.max(phi[k] - (a + b * integral));
        bound = bound.max(phi[k] - gronwall_bound(a, b, t));
    }
    Ok(GronwallCheck {
        hypothesis_gap: hyp,
        bound_gap: bound,
        hypothesis_holds: hyp <= tol,
        bound_holds: bound <= tol,
    })
}

fn de_casteljau(coeffs: &[f64], t: f64) -> f64 {
    let mut b = coeffs.to_vec();
    let n = b.len();
    for r in 1..n {
        for i in 0..n - r {
            b[i] = (1.0 - t) * b[i] + t * b[i + 1];
        }
    }
    b[0]
}

/// Value and derivative of `B_n(u)` at `t`, from `u(k/n)` for `k = 0..=n`.
///
/// The derivative is `n·Σ_k (u((k+1)/n) − u(k/n))·C(n−1,k) t^k (1−t)^{n−1−k}`,
/// itself evaluated by de Casteljau.
pub fn bernstein_approx(samples: &[f64], t: f64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput("Bernstein degree must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidInput(format!("Bernstein argument {t} outside [0, 1]")));
    }
    let n = (samples.len() - 1) as f64;
    let diffs: Vec<f64> = samples.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((de_casteljau(samples, t), n * de_casteljau(&diffs, t)))
}

fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 / (x * x - 1.0)).exp()
    } else {
        0.0
    }
}

/// `c` with `∫ c·e^{1/(x²−1)} dx = 1` over `(−1, 1)`, by double-exponential quadrature.
pub fn kernel_constant() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| 1.0 / double_exponential::integrate(bump, -1.0, 1.0, 1e-14).integral)
}

/// `φ_r(x) = r⁻¹ φ(x/r)`.
pub fn kernel(x: f64, r: f64) -> f64 {
    kernel_constant() * bump(x / r) / r
}

/// Convolution of `h` (extended by zero outside the domain) with `φ_r`, as a grid quadrature.
///
/// The quadrature weights are rescaled by the lattice sum of `φ_r` so constants are
/// reproduced exactly away from the boundary.
pub fn mollify(h: &Field, r: f64) -> Result<Field> {
    let grid = h.grid();
    if !(r > 0.0 && r < grid.length()) {
        return Err(Error::InvalidInput(format!(
            "mollifier radius {r} outside (0, {})",
            grid.length()
        )));
    }
    let hx = grid.hx();
    let reach = (r / hx).ceil() as usize;
    let weights: Vec<f64> = (0..=reach).map(|m| kernel(m as f64 * hx, r) * hx).collect();
    let total = weights[0] + 2.0 * weights[1..].iter().sum::<f64>();
    let hv = h.values();
    let n = hv.len();
    let out = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(reach);
            let hi = (i + reach).min(n - 1);
            (lo..=hi).map(|j| hv[j] * weights[i.abs_diff(j)]).sum::<f64>() / total
        })
        .collect();
    Ok(Field::from_vec(grid.homogeneous(), out))
}

/// `h_r = φ_r * h + r/(r+1)`: smooth, bounded and strictly positive.
pub fn mollify_positive(h: &Field, r: f64) -> Result<Field> {
    if let Some(node) = h.values().iter().position(|&v| v < -1e-12) {
        return Err(Error::NegativeInput {
            node,
            value: h.values()[node],
        });
    }
    let shift = r / (r + 1.0);
    Ok(mollify(h, r)?.map(|v| v + shift))
}
