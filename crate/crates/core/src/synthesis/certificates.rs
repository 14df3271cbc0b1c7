use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{h01_norm, l2_inner, Field};
use crate::nonlinearity::NonlinearitySpec;

/// Which quadratic form the dissipativity check evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipativityForm {
    /// `⟨f(y) + b·y, y⟩_{L²}`, taken literally.
    L2,
    /// `⟨Δy + b·y + f(y), y⟩_{L²} = −‖y‖²_{H¹₀} + ⟨f(y) + b·y, y⟩`.
    Energy,
}

impl DissipativityForm {
    pub fn name(self) -> &'static str {
        match self {
            DissipativityForm::L2 => "L2 form",
            DissipativityForm::Energy => "energy form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub n_random: usize,
    /// Random samples are uniform in `[−A, A]` nodally.
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct DissipativityReport {
    pub form: DissipativityForm,
    /// Largest value of the form over all samples.
    pub max_value: f64,
    /// Largest value divided by `‖y‖²_{L²}`; decides pass/fail.
    pub max_ratio: f64,
    /// Sample attaining `max_ratio` (first one on ties).
    pub witness: Field,
    pub passed: bool,
    pub sample_count: usize,
}

impl DissipativityReport {
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::P3Violated {
                max_value: self.max_value,
                form: self.form.name(),
            })
        }
    }
}

/// Samples the dissipativity form on `±1`, `±θ1` (when given), `sin(mπx/l)` for `m = 1..5`,
/// then `n_random` uniform random fields. Passes iff the largest normalized value is ≤ 1e−10.
pub fn check_dissipativity(
    b: &Field,
    f: &NonlinearitySpec,
    theta1: Option<&Field>,
    sampling: SamplingParams,
    form: DissipativityForm,
) -> DissipativityReport {
    let grid = b.grid().homogeneous();
    let mut samples = vec![grid.constant(1.0), grid.constant(-1.0)];
    if let Some(t) = theta1 {
        let t = t.clone().with_grid(grid);
        samples.push(-&t);
        samples.insert(2, t);
    }
    samples.extend((1..=5).map(|m| grid.sine_mode(m)));
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let amp = sampling.amplitude;
    for _ in 0..sampling.n_random {
        let vals = (0..grid.n_interior()).map(|_| rng.gen_range(-amp..=amp)).collect();
        samples.push(Field::from_vec(grid, vals));
    }

    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0usize);
    for (k, y) in samples.iter().enumerate() {
        let n2 = l2_inner(y, y);
        if n2 == 0.0 {
            continue;
        }
        let by_plus_f = &y.mul_pointwise(b) + &f.apply(y);
        let mut value = l2_inner(&by_plus_f, y);
        if form == DissipativityForm::Energy {
            value -= h01_norm(y).powi(2);
        }
        let ratio = value / n2;
        best.0 = best.0.max(value);
        if ratio > best.1 {
            best.1 = ratio;
            best.2 = k;
        }
    }
    DissipativityReport {
        form,
        max_value: best.0,
        max_ratio: best.1,
        witness: samples[best.2].clone(),
        passed: best.1 <= 1e-10,
        sample_count: samples.len(),
    }
}

/// `γ(s) = ‖h‖∞ T² s e^{sT}(1 + e^{sT})`.
pub fn gamma(h_sup: f64, t: f64, s: f64) -> f64 {
    let e = (s * t).exp();
    h_sup * t * t * s * e * (1.0 + e)
}

/// `γ⁻¹(δ)` by bisection, relative tolerance 1e−10.
pub fn lipschitz_threshold(h_sup: f64, t: f64, delta: f64) -> Result<f64> {
    if !(h_sup > 0.0 && t > 0.0 && delta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "threshold needs positive inputs, got h_sup={h_sup}, T={t}, delta={delta}"
        )));
    }
    let mut hi = 1.0_f64;
    while gamma(h_sup, t, hi) < delta {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::InvalidInput("threshold overflow".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if gamma(h_sup, t, mid) < delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    fn sampling() -> SamplingParams {
        SamplingParams {
            n_random: 32,
            amplitude: 2.0,
            seed: 7,
        }
    }

    #[test]
    fn negative_potential_passes() {
        let g = Grid1D::new(1.0, 49).unwrap();
        let r = check_dissipativity(
            &g.constant(-1.0),
            &NonlinearitySpec::zero(),
            None,
            sampling(),
            DissipativityForm::L2,
        );
        assert!(r.passed && r.max_value < 0.0);
        assert!((r.max_ratio + 1.0).abs() < 1e-12);
    }

    #[test]
    fn positive_potential_fails_with_constant_witness() {
        let g = Grid1D::new(1.0, 49).unwrap();
        let r = check_dissipativity(
            &g.constant(1.0),
            &NonlinearitySpec::zero(),
            None,
            sampling(),
            DissipativityForm::L2,
        );
        assert!(!r.passed);
        assert!(r.witness.values().iter().all(|v| *v == 1.0));
        assert!(matches!(r.into_result(), Err(Error::P3Violated { .. })));
    }

    #[test]
    fn threshold_inverts_gamma() {
        let d = gamma(1.0, 1.0, 0.1);
        assert!((d - 0.232_657_8).abs() < 1e-6);
        assert!((lipschitz_threshold(1.0, 1.0, d).unwrap() - 0.1).abs() < 1e-9);
        assert!(lipschitz_threshold(1.0, 1.0, 1e-12).unwrap() < 1e-11);
        assert!(lipschitz_threshold(0.0, 1.0, 1.0).is_err());
    }
}
