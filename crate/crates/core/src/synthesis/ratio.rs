use crate::error::{Error, Result};
use crate::grid::{laplacian, Field};
use crate::nonlinearity::NonlinearitySpec;

/// Default cap on the sup norm of a ratio field.
pub const RATIO_CAP: f64 = 1e6;
/// Relative tolerance for the nodal implications of condition (ii) and (P4).
pub const TAU_COND: f64 = 1e-8;

/// `numer / denom` on `Λ(denom)`, zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioField {
    pub field: Field,
    pub sup_norm: f64,
    pub admissible: bool,
}

pub fn admissible_ratio(numer: &Field, denom: &Field, ratio_cap: f64) -> RatioField {
    let supp = denom.support();
    let field = numer.zip_map(denom, |n, d| n / d).masked(&supp);
    let sup_norm = field.sup_norm();
    RatioField {
        admissible: sup_norm <= ratio_cap,
        field,
        sup_norm,
    }
}

/// Nodal form of "`denom(x) = 0 ⇒ numer(x) = 0`" with tolerance `tau·max|numer|`.
pub fn check_condition_two(numer: &Field, denom: &Field, tau: f64) -> Result<()> {
    let tol = tau * numer.sup_norm();
    let supp = denom.support();
    let bad = (0..numer.len()).find(|&i| !supp[i] && numer.values()[i].abs() > tol);
    match bad {
        Some(node) => Err(Error::ConditionTwoViolated {
            node,
            x: numer.grid().x(node),
            value: numer.values()[node],
        }),
        None => Ok(()),
    }
}

fn require_admissible(r: RatioField, what: &'static str, cap: f64) -> Result<RatioField> {
    if r.admissible {
        Ok(r)
    } else {
        Err(Error::InadmissibleRatio {
            what,
            sup_norm: r.sup_norm,
            cap,
        })
    }
}

/// Static control `a/T` with `a = (θ2 − w2)/w1` on `Λ(w1)`.
pub fn velocity_jump_control(
    w1: &Field,
    w2: &Field,
    theta2: &Field,
    t: f64,
    ratio_cap: f64,
    tau_cond: f64,
) -> Result<Field> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("steering time must be positive, got {t}")));
    }
    let numer = theta2 - w2;
    let a = require_admissible(admissible_ratio(&numer, w1, ratio_cap), "a", ratio_cap)?;
    check_condition_two(&numer, w1, tau_cond)?;
    Ok(a.field.map(|v| v / t))
}

/// Nodal form of (P4): `ζ(x) = 0 ⇒ f(ζ)(x) = 0`.
pub fn check_zero_set(zeta: &Field, f: &NonlinearitySpec, tau: f64) -> Result<()> {
    let fz = f.apply(zeta);
    let tol = tau * fz.sup_norm();
    let supp = zeta.support();
    match (0..zeta.len()).find(|&i| !supp[i] && fz.values()[i].abs() > tol) {
        Some(node) => Err(Error::P4Violated {
            node,
            x: zeta.grid().x(node),
            value: fz.values()[node],
        }),
        None => Ok(()),
    }
}

/// `b_ζ = −(Δζ + f(ζ))/ζ` on `Λ(ζ)`, which makes `(ζ, 0)` an equilibrium.
pub fn stabilizing_potential(zeta: &Field, f: &NonlinearitySpec, ratio_cap: f64) -> Result<RatioField> {
    check_zero_set(zeta, f, TAU_COND)?;
    let numer = -&(&laplacian(zeta) + &f.apply(zeta));
    require_admissible(admissible_ratio(&numer, zeta, ratio_cap), "b_zeta", ratio_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, Interval};
    use std::f64::consts::PI;

    fn unit() -> Grid1D {
        Grid1D::new(1.0, 199).unwrap()
    }

    #[test]
    fn equal_fields_give_one() {
        let g = unit();
        let s = g.sample(|x| (PI * x).sin());
        let r = admissible_ratio(&s, &s, RATIO_CAP);
        assert!(r.admissible);
        assert!(r.field.values().iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn boundary_blowup_of_inverse_parabola() {
        let g = unit();
        let r = admissible_ratio(&g.constant(1.0), &g.sample(|x| x * (1.0 - x)), RATIO_CAP);
        let hx = g.hx();
        assert!(r.admissible);
        assert!((r.sup_norm - 1.0 / (hx * (1.0 - hx))).abs() < 1e-9);
        assert!((r.sup_norm - 201.0).abs() < 0.1);
    }

    #[test]
    fn empty_support_gives_zero() {
        let g = unit();
        let r = admissible_ratio(&g.constant(1.0), &g.zeros(), RATIO_CAP);
        assert!(r.admissible && r.sup_norm == 0.0);
        assert!(check_condition_two(&g.constant(1.0), &g.zeros(), TAU_COND).is_err());
    }

    #[test]
    fn velocity_jump_examples() {
        let g = unit();
        let s = g.sample(|x| (PI * x).sin());
        let v = velocity_jump_control(&s, &g.zeros(), &s, 0.1, RATIO_CAP, TAU_COND).unwrap();
        assert!(v.values().iter().all(|x| (x - 10.0).abs() < 1e-12));

        let bump = Interval::new(0.4, 0.6).unwrap().indicator(&g);
        let a = velocity_jump_control(&s, &g.zeros(), &bump, 1.0, RATIO_CAP, TAU_COND).unwrap();
        let mid = 99;
        assert!((g.x(mid) - 0.5).abs() < 1e-12);
        assert!((a.values()[mid] - 1.0).abs() < 1e-12);

        let hole = g.sample(|x| {
            let d = ((x - 0.5).abs() - 0.1).max(0.0);
            d * d
        });
        let theta2 = Interval::new(0.45, 0.55).unwrap().indicator(&g);
        let e = velocity_jump_control(&hole, &g.zeros(), &theta2, 0.1, RATIO_CAP, TAU_COND);
        assert!(matches!(e, Err(Error::ConditionTwoViolated { .. })));
    }

    #[test]
    fn potential_of_reference_fields() {
        let g = unit();
        let b = stabilizing_potential(&g.sample(|x| (PI * x).sin()), &NonlinearitySpec::zero(), RATIO_CAP).unwrap();
        assert!(b.field.values().iter().all(|v| (v - PI * PI).abs() < 1e-2));
        let b = stabilizing_potential(&g.sample(|x| x * (1.0 - x)), &NonlinearitySpec::zero(), RATIO_CAP).unwrap();
        assert!((b.field.values()[99] - 8.0).abs() < 1e-9);
        let shifted = NonlinearitySpec::custom("s+1", 1.0, |s| s + 1.0).unwrap();
        let hole = g.sample(|x| ((x - 0.5).abs() - 0.1).max(0.0));
        assert!(matches!(
            stabilizing_potential(&hole, &shifted, RATIO_CAP),
            Err(Error::P4Violated { .. })
        ));
    }
}
