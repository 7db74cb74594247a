use super::ComState;
use crate::error::{Error, Result};
use crate::geometry::UnitSystem;
use crate::Vec3;

/// Fixed-point tolerance of [`cross_term_decoupling`], relative to the variable scales.
pub const DECOUPLING_TOLERANCE: f64 = 1e-14;
const MAX_ITERATIONS: usize = 200;

/// Corrections `(R - Q, r - q, p_r - p)` at the new-coordinate point.
fn corrections(new: &ComState, units: &UnitSystem) -> (Vec3, Vec3, Vec3) {
    let (m, mu, dm) = (new.total_mass(), new.reduced_mass(), new.mass_asymmetry());
    let c2 = units.c2();
    let k12 = new.e1 * new.e2 * units.coulomb_constant();
    let (big_p, q, p) = (new.total_momentum, new.relative, new.relative_momentum);
    let qn = q.norm();
    let qp = q.dot(&big_p);
    let pp = big_p.dot(&p);
    let p2 = p.norm_squared();
    let s = 1.0 / (2.0 * m * m * c2);

    let d_centre = (q * (p2 / mu) + q * (k12 / qn)) * (dm * s) - (p * qp + q * pp) * s;
    let d_rel = p * (dm / mu * 2.0 * s * qp) - big_p * (qp * s);
    let d_mom = big_p * (pp * s) - (big_p * (p2 / mu) + (big_p / qn - q * (qp / qn.powi(3))) * k12) * (dm * s);
    (d_centre, d_rel, d_mom)
}

/// Old centre-of-mass variables from the decoupled ones `(Q, P, q, p)`.
pub fn cross_term_recoupling(new: &ComState, units: &UnitSystem) -> Result<ComState> {
    if new.relative.norm() == 0.0 {
        return Err(Error::CoincidentParticles);
    }
    let (dc, dr, dp) = corrections(new, units);
    Ok(ComState {
        centre: new.centre + dc,
        relative: new.relative + dr,
        relative_momentum: new.relative_momentum + dp,
        ..*new
    })
}

/// Decoupled variables `(Q, P, q, p)` from old centre-of-mass variables, by
/// fixed-point inversion of [`cross_term_recoupling`].
pub fn cross_term_decoupling(old: &ComState, units: &UnitSystem) -> Result<ComState> {
    old.validate(units)?;
    let scale_r = old.relative.norm();
    let scale_p = old.relative_momentum.norm().max(old.total_momentum.norm() * old.reduced_mass() / old.total_mass());
    let scale_c = old.centre.norm().max(scale_r);
    let mut new = *old;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let (dc, dr, dp) = corrections(&new, units);
        let next = ComState {
            centre: old.centre - dc,
            relative: old.relative - dr,
            relative_momentum: old.relative_momentum - dp,
            ..*old
        };
        change = ((next.centre - new.centre).norm() / scale_c)
            .max((next.relative - new.relative).norm() / scale_r)
            .max((next.relative_momentum - new.relative_momentum).norm() / scale_p.max(f64::MIN_POSITIVE));
        new = next;
        if change <= DECOUPLING_TOLERANCE {
            return Ok(new);
        }
    }
    Err(Error::NoConvergence {
        what: "cross-term decoupling",
        iterations: MAX_ITERATIONS,
        residual: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComState {
        ComState {
            m1: 1.0,
            m2: 4.0,
            e1: -1.0,
            e2: 1.0,
            centre: Vec3::new(1.0, 2.0, -1.0),
            total_momentum: Vec3::new(3.0, -1.0, 2.0),
            relative: Vec3::new(0.8, -0.3, 0.5),
            relative_momentum: Vec3::new(0.4, 0.9, -0.2),
        }
    }

    #[test]
    fn round_trip() {
        let units = UnitSystem::atomic().with_c(20.0).unwrap();
        let old = sample();
        let back = cross_term_recoupling(&cross_term_decoupling(&old, &units).unwrap(), &units).unwrap();
        assert!((back.centre - old.centre).norm() < 1e-13);
        assert!((back.relative - old.relative).norm() < 1e-13);
        assert!((back.relative_momentum - old.relative_momentum).norm() < 1e-13);
    }

    #[test]
    fn identity_for_large_c() {
        let units = UnitSystem::atomic().with_c(1e12).unwrap();
        let new = sample();
        let old = cross_term_recoupling(&new, &units).unwrap();
        assert!((old.relative - new.relative).norm() < 1e-20);
        assert!((old.centre - new.centre).norm() < 1e-20);
    }

    #[test]
    fn zero_total_momentum_moves_only_the_centre() {
        let units = UnitSystem::atomic();
        let new = ComState {
            total_momentum: Vec3::zeros(),
            ..sample()
        };
        let old = cross_term_recoupling(&new, &units).unwrap();
        assert_eq!(old.relative, new.relative);
        assert_eq!(old.relative_momentum, new.relative_momentum);
        assert!((old.centre - new.centre).norm() > 0.0);

        let equal = ComState { m2: 1.0, ..new };
        let old = cross_term_recoupling(&equal, &units).unwrap();
        assert_eq!(old.centre, equal.centre);
    }

    #[test]
    fn coincident_rejected() {
        let new = ComState {
            relative: Vec3::zeros(),
            ..sample()
        };
        assert!(cross_term_recoupling(&new, &UnitSystem::atomic()).is_err());
    }
}
