use super::TermBreakdown;
use crate::em::{field_energy, FieldConfiguration};
use crate::error::Result;
use crate::geometry::{Frame, PpnContext};
use crate::lagrangian::TwoParticleState;

/// Minimal-coupling lab Hamiltonian with per-particle gravity terms.
///
/// Kinetic momenta are `p_i - e_i A(r_i)`. Each particle sees `phi(r_i)`;
/// the Coulomb and field-energy prefactors use the potential at the centre of
/// mass, matching [`crate::lagrangian::total_lagrangian`].
pub fn h_lab_new(state: &TwoParticleState, fields: &FieldConfiguration, ctx: &PpnContext, t: f64) -> Result<TermBreakdown> {
    state.validate(&ctx.units)?;
    let (p1, p2) = state.momenta()?;
    let rel = state.separation()?;
    let r = rel.norm();
    let c2 = ctx.c2();
    let centre_ctx = ctx.at_point(&state.centre_of_mass())?;
    let k12 = state.e1 * state.e2 * ctx.units.coulomb_constant();

    let q1 = p1 - fields.vector_potential(&state.r1, t) * state.e1;
    let q2 = p2 - fields.vector_potential(&state.r2, t) * state.e2;
    let particles = [(state.m1, q1, ctx.phi_at(&state.r1)), (state.m2, q2, ctx.phi_at(&state.r2))];

    let mut b = TermBreakdown::new();
    b.push("kinetic", particles.iter().map(|(m, q, _)| q.norm_squared() / (2.0 * m)).sum());
    b.push(
        "p4",
        particles
            .iter()
            .map(|(m, q, _)| -q.norm_squared().powi(2) / (8.0 * m.powi(3) * c2))
            .sum(),
    );
    b.push("coulomb", centre_ctx.em_prefactor() * k12 / r);
    b.push(
        "darwin",
        -k12 / (2.0 * c2 * state.m1 * state.m2) * (q1.dot(&q2) / r + q1.dot(&rel) * q2.dot(&rel) / r.powi(3)),
    );
    b.push("newton_potential", particles.iter().map(|(m, _, phi)| m * phi).sum());
    b.push(
        "kinetic_phi",
        particles
            .iter()
            .map(|(m, q, phi)| (2.0 * ctx.gamma + 1.0) * phi * q.norm_squared() / (2.0 * m * c2))
            .sum(),
    );
    b.push(
        "phi_squared",
        particles
            .iter()
            .map(|(m, _, phi)| (2.0 * ctx.beta - 1.0) * m * phi * phi / (2.0 * c2))
            .sum(),
    );
    b.push("field_energy", field_energy(fields, t, &centre_ctx, Frame::Coordinate)?);
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitSystem;
    use crate::Vec3;

    fn state() -> TwoParticleState {
        TwoParticleState::with_momenta(
            1.0,
            2.0,
            1.0,
            Vec3::new(0.5, 0.1, 0.0),
            Vec3::new(-0.2, 0.3, 0.1),
            Vec3::new(0.4, -0.3, 0.2),
            Vec3::new(-0.1, 0.6, 0.0),
        )
    }

    #[test]
    fn gravity_terms_vanish_in_flat_space() {
        let b = h_lab_new(&state(), &FieldConfiguration::none(), &PpnContext::flat(UnitSystem::atomic()), 0.0).unwrap();
        for name in ["newton_potential", "kinetic_phi", "phi_squared", "field_energy"] {
            assert_eq!(b.get(name), Some(0.0), "{name}");
        }
    }

    #[test]
    fn beta_derivative_sums_particle_potentials() {
        let ctx = PpnContext::from_ratio(UnitSystem::atomic(), 1.0, 1.0, -1e-3)
            .unwrap()
            .with_gradient(Vec3::new(1.0, -2.0, 0.5), Vec3::zeros())
            .unwrap();
        let s = state();
        let h = |beta: f64| h_lab_new(&s, &FieldConfiguration::none(), &ctx.with_beta(beta).unwrap(), 0.0).unwrap().total();
        let slope = (h(1.5) - h(0.5)) / 1.0;
        let (f1, f2) = (ctx.phi_at(&s.r1), ctx.phi_at(&s.r2));
        let want = (s.m1 * f1 * f1 + s.m2 * f2 * f2) / ctx.c2();
        assert!((slope - want).abs() <= 1e-8 * want);
    }

    #[test]
    fn needs_momenta() {
        let s = state().with_kinematics(crate::Kinematics::Velocities {
            v1: Vec3::zeros(),
            v2: Vec3::zeros(),
        });
        assert!(h_lab_new(&s, &FieldConfiguration::none(), &PpnContext::flat(UnitSystem::atomic()), 0.0).is_err());
    }
}
