//! Pointwise (Nemytskii) nonlinearities `f(w)(x) = k(w(x))`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Interval};

pub type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityKind {
    Zero,
    Custom,
}

/// Sign convention for the bump nonlinearity of the worked example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpSign {
    /// `k(s) = c·s·(s−a)²(s−b)²`, i.e. `k = −sα(s)` with `α = −c(s−a)²(s−b)²`.
    #[default]
    AsPrinted,
    Flipped,
}

impl BumpSign {
    pub fn factor(self) -> f64 {
        match self {
            BumpSign::AsPrinted => 1.0,
            BumpSign::Flipped => -1.0,
        }
    }
}

#[derive(Clone)]
pub struct NonlinearitySpec {
    kind: NonlinearityKind,
    map: Option<ScalarMap>,
    lipschitz: f64,
    support: Option<Interval>,
    /// When set, evaluates `k(s + θ_i) − k(θ_i)` at node `i`.
    shift: Option<Arc<[f64]>>,
    label: String,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("kind", &self.kind)
            .field("label", &self.label)
            .field("lipschitz", &self.lipschitz)
            .field("support", &self.support)
            .field("shifted", &self.shift.is_some())
            .finish()
    }
}

impl NonlinearitySpec {
    pub fn zero() -> Self {
        Self {
            kind: NonlinearityKind::Zero,
            map: None,
            lipschitz: 0.0,
            support: None,
            shift: None,
            label: "zero".into(),
        }
    }

    pub fn custom(
        label: impl Into<String>,
        lipschitz: f64,
        map: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "Lipschitz constant must be nonnegative, got {lipschitz}"
            )));
        }
        Ok(Self {
            kind: NonlinearityKind::Custom,
            map: Some(Arc::new(map)),
            lipschitz,
            support: None,
            shift: None,
            label: label.into(),
        })
    }

    /// `k(s) = amp·sin(s)`.
    pub fn sine(amp: f64) -> Self {
        Self::custom(format!("sine({amp})"), amp.abs(), move |s| amp * s.sin()).expect("finite amplitude")
    }

    /// `k(s) = c·s`.
    pub fn linear(c: f64) -> Self {
        Self::custom(format!("linear({c})"), c.abs(), move |s| c * s).expect("finite slope")
    }

    /// `k(s) = ±c·s(s−a)²(s−b)²` for `s ∈ (a, b)`, zero elsewhere.
    pub fn bump(c: f64, range: Interval, sign: BumpSign) -> Self {
        let (a, b) = (range.a, range.b);
        let sc = sign.factor() * c;
        let k = move |s: f64| sc * s * (s - a).powi(2) * (s - b).powi(2);
        let dk = |s: f64| {
            (s - a).powi(2) * (s - b).powi(2)
                + 2.0 * s * (s - a) * (s - b).powi(2)
                + 2.0 * s * (s - a).powi(2) * (s - b)
        };
        let n = 20_000;
        let lip = (0..=n)
            .map(|j| dk(a + (b - a) * j as f64 / n as f64).abs())
            .fold(0.0, f64::max)
            * c.abs();
        let mut spec =
            Self::custom(format!("bump(c={c}, a={a}, b={b}, {sign:?})"), lip * (1.0 + 1e-6), k).expect("finite bump");
        spec.support = Some(range);
        spec
    }

    /// Restricts the map to a value-space interval; zero outside it.
    pub fn with_support(mut self, range: Interval) -> Self {
        self.support = Some(range);
        self
    }

    /// `s ↦ k(s + θ) − k(θ)` nodally. The Lipschitz constant is unchanged.
    pub fn shifted(&self, theta: &Field) -> Self {
        let mut out = self.clone();
        let base: Vec<f64> = match &self.shift {
            Some(old) => old.iter().zip(theta.values()).map(|(a, b)| a + b).collect(),
            None => theta.values().to_vec(),
        };
        out.shift = Some(base.into());
        out.label = format!("{} shifted", self.label);
        out
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.kind == NonlinearityKind::Zero
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn support(&self) -> Option<Interval> {
        self.support
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The unshifted scalar map `k(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        match (&self.map, self.support) {
            (None, _) => 0.0,
            (Some(_), Some(r)) if !r.contains(s) => 0.0,
            (Some(k), _) => k(s),
        }
    }

    /// Value at node `i`, honouring a shift if present.
    pub fn eval_at(&self, i: usize, s: f64) -> f64 {
        match &self.shift {
            Some(theta) => self.eval(s + theta[i]) - self.eval(theta[i]),
            None => self.eval(s),
        }
    }

    pub fn apply(&self, w: &Field) -> Field {
        let mut out = vec![0.0; w.len()];
        self.apply_into(w.values(), &mut out);
        Field::from_vec(w.grid().homogeneous(), out)
    }

    pub(crate) fn apply_into(&self, w: &[f64], out: &mut [f64]) {
        if self.is_zero() {
            out.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        for (i, (o, &s)) in out.iter_mut().zip(w).enumerate() {
            *o = self.eval_at(i, s);
        }
    }

    /// Largest observed `|k(s)−k(t)| / |s−t|` over a uniform sample of `[lo, hi]`.
    pub fn sampled_lipschitz(&self, lo: f64, hi: f64, n: usize) -> f64 {
        let pts: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).collect();
        pts.windows(2)
            .map(|p| ((self.eval(p[1]) - self.eval(p[0])) / (p[1] - p[0])).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    #[test]
    fn zero_is_zero() {
        let f = NonlinearitySpec::zero();
        assert_eq!(f.eval(3.0), 0.0);
        assert!(f.is_zero());
    }

    #[test]
    fn bump_vanishes_outside_support() {
        let f = NonlinearitySpec::bump(10.0, Interval::new(0.9, 2.1).unwrap(), BumpSign::AsPrinted);
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(2.5), 0.0);
        assert!(f.eval(1.5) > 0.0);
        let g = NonlinearitySpec::bump(10.0, Interval::new(0.9, 2.1).unwrap(), BumpSign::Flipped);
        assert_eq!(g.eval(1.5), -f.eval(1.5));
    }

    #[test]
    fn declared_lipschitz_dominates_samples() {
        let f = NonlinearitySpec::bump(3.0, Interval::new(0.9, 2.1).unwrap(), BumpSign::AsPrinted);
        assert!(f.sampled_lipschitz(-1.0, 3.0, 40_000) <= f.lipschitz());
        let s = NonlinearitySpec::sine(0.1);
        assert!(s.sampled_lipschitz(-5.0, 5.0, 10_000) <= s.lipschitz() + 1e-12);
    }

    #[test]
    fn shift_composes() {
        let g = Grid1D::new(1.0, 4).unwrap();
        let f = NonlinearitySpec::custom("cube", 27.0, |s| s * s * s).unwrap();
        let t1 = g.constant(0.5);
        let t2 = g.constant(0.25);
        let once = f.shifted(&(&t1 + &t2));
        let twice = f.shifted(&t1).shifted(&t2);
        for i in 0..4 {
            assert!((once.eval_at(i, 0.3) - twice.eval_at(i, 0.3)).abs() < 1e-14);
        }
        assert_eq!(f.shifted(&t1).eval_at(0, 0.0), 0.0);
    }
}
