use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Fitted `‖z(t)‖ ≤ M e^{−σt} ‖z(0)‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub sigma: f64,
    /// Relative constant: majorizes `‖z(t)‖/‖z(0)‖·e^{σt}` at every sample.
    pub m: f64,
    /// `M·‖z(0)‖`, the absolute amplitude of the majorant.
    pub amplitude: f64,
    /// Intercept of the least-squares line through `ln(‖z(t)‖/‖z(0)‖)`.
    pub intercept: f64,
}

impl DecayFit {
    /// Smallest `T ≥ 0` with `M·norm0·e^{−σT} ≤ target`, i.e. `(1/σ) ln(M·norm0/target)`.
    pub fn time_to_reach(&self, norm0: f64, target: f64) -> Result<f64> {
        if !(self.sigma > 0.0) {
            return Err(Error::NoDecay { sigma: self.sigma });
        }
        Ok(((self.m * norm0 / target).ln() / self.sigma).max(0.0))
    }
}

pub fn estimate_decay(traj: &Trajectory) -> Result<DecayFit> {
    estimate_decay_from_norms(&traj.times, &traj.norms())
}

/// Least-squares line through `ln(norm/norm0)` over the second half of the samples.
pub fn estimate_decay_from_norms(times: &[f64], norms: &[f64]) -> Result<DecayFit> {
    if times.len() != norms.len() || norms.len() < 4 {
        return Err(Error::DegenerateFit(format!(
            "need at least 4 aligned samples, got {}",
            norms.len()
        )));
    }
    let n0 = norms[0];
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::DegenerateFit(format!("initial norm {n0} cannot be normalized")));
    }
    let start = norms.len() / 2;
    let window = start..norms.len();
    if let Some(k) = window.clone().find(|&k| !(norms[k] > 1e-250)) {
        return Err(Error::DegenerateFit(format!(
            "norm underflows at t = {} (already converged)",
            times[k]
        )));
    }
    let m = window.len() as f64;
    let tb = window.clone().map(|k| times[k]).sum::<f64>() / m;
    let ys: Vec<f64> = window.clone().map(|k| (norms[k] / n0).ln()).collect();
    let yb = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, y) in window.zip(&ys) {
        let dx = times[k] - tb;
        sxy += dx * (y - yb);
        sxx += dx * dx;
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("fit window has zero time extent".into()));
    }
    let slope = sxy / sxx;
    let sigma = -slope;
    let intercept = yb - slope * tb;
    let majorant = times
        .iter()
        .zip(norms)
        .map(|(t, nrm)| nrm / n0 * (sigma * (t - times[0])).exp())
        .fold(intercept.exp(), f64::max);
    Ok(DecayFit {
        sigma,
        m: majorant,
        amplitude: majorant * n0,
        intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let ts: Vec<f64> = (0..200).map(|k| k as f64 * 0.1).collect();
        let ns: Vec<f64> = ts.iter().map(|t| 2.0 * (-0.5 * t).exp()).collect();
        let fit = estimate_decay_from_norms(&ts, &ns).unwrap();
        assert!((fit.sigma - 0.5).abs() < 1e-6);
        assert!((fit.amplitude - 2.0).abs() < 1e-6);
        assert!((fit.m - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_norm_has_no_decay() {
        let ts: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let fit = estimate_decay_from_norms(&ts, &[3.0; 50]).unwrap();
        assert_eq!(fit.sigma, 0.0);
        assert!(matches!(fit.time_to_reach(1.0, 0.1), Err(Error::NoDecay { .. })));
    }

    #[test]
    fn underflow_is_degenerate() {
        let ts: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let mut ns = vec![1.0; 10];
        ns[9] = 0.0;
        assert!(matches!(
            estimate_decay_from_norms(&ts, &ns),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn phase_one_time_formula() {
        let fit = DecayFit {
            sigma: 0.5,
            m: 2.0,
            amplitude: 2.0,
            intercept: 0.0,
        };
        assert!((fit.time_to_reach(1.0, 0.01).unwrap() - 2.0 * 200f64.ln()).abs() < 1e-12);
        assert!((fit.time_to_reach(1.0, 0.01).unwrap() - 10.5966).abs() < 1e-4);
    }
}
