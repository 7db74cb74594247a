//! Matter Lagrangians: the exact and expanded point-particle Lagrangian in
//! the PPN background, the flat-space Darwin pair, and the gravity-corrected
//! two-particle total.

use serde::{Deserialize, Serialize};

use crate::em::{em_lagrangian_terms, FieldConfiguration};
use crate::error::{Error, Result};
use crate::geometry::{PpnContext, UnitSystem};
use crate::Vec3;

/// Expansion-validity guard on `|v|/c` and `|p|/(m c)`.
pub const VELOCITY_GUARD: f64 = 0.3;

/// Which kinematic variables a state carries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case")]
pub enum Kinematics {
    Velocities { v1: Vec3, v2: Vec3 },
    Momenta { p1: Vec3, p2: Vec3 },
}

/// Two charged constituents in coordinate variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoParticleState {
    pub m1: f64,
    pub m2: f64,
    pub e1: f64,
    pub e2: f64,
    pub r1: Vec3,
    pub r2: Vec3,
    pub kinematics: Kinematics,
}

impl TwoParticleState {
    /// Charges `e1 = -e`, `e2 = +e`.
    pub fn with_velocities(m1: f64, m2: f64, e: f64, r1: Vec3, r2: Vec3, v1: Vec3, v2: Vec3) -> Self {
        Self {
            m1,
            m2,
            e1: -e,
            e2: e,
            r1,
            r2,
            kinematics: Kinematics::Velocities { v1, v2 },
        }
    }

    /// Charges `e1 = -e`, `e2 = +e`.
    pub fn with_momenta(m1: f64, m2: f64, e: f64, r1: Vec3, r2: Vec3, p1: Vec3, p2: Vec3) -> Self {
        Self {
            m1,
            m2,
            e1: -e,
            e2: e,
            r1,
            r2,
            kinematics: Kinematics::Momenta { p1, p2 },
        }
    }

    pub fn with_charges(mut self, e1: f64, e2: f64) -> Self {
        self.e1 = e1;
        self.e2 = e2;
        self
    }

    pub fn with_kinematics(mut self, kinematics: Kinematics) -> Self {
        self.kinematics = kinematics;
        self
    }

    pub fn velocities(&self) -> Result<(Vec3, Vec3)> {
        match self.kinematics {
            Kinematics::Velocities { v1, v2 } => Ok((v1, v2)),
            Kinematics::Momenta { .. } => Err(Error::WrongRepresentation {
                expected: "velocities",
                found: "momenta",
            }),
        }
    }

    pub fn momenta(&self) -> Result<(Vec3, Vec3)> {
        match self.kinematics {
            Kinematics::Momenta { p1, p2 } => Ok((p1, p2)),
            Kinematics::Velocities { .. } => Err(Error::WrongRepresentation {
                expected: "momenta",
                found: "velocities",
            }),
        }
    }

    /// `r1 - r2`, rejecting coincident particles.
    pub fn separation(&self) -> Result<Vec3> {
        let r = self.r1 - self.r2;
        if r.norm() == 0.0 {
            return Err(Error::CoincidentParticles);
        }
        Ok(r)
    }

    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2
    }

    pub fn centre_of_mass(&self) -> Vec3 {
        (self.r1 * self.m1 + self.r2 * self.m2) / self.total_mass()
    }

    /// Masses positive, particles separated, speeds within the guard.
    pub fn validate(&self, units: &UnitSystem) -> Result<()> {
        if !(self.m1 > 0.0 && self.m2 > 0.0 && self.m1.is_finite() && self.m2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "masses must be positive, got {} and {}",
                self.m1, self.m2
            )));
        }
        self.separation()?;
        let ratio = match self.kinematics {
            Kinematics::Velocities { v1, v2 } => v1.norm().max(v2.norm()) / units.c,
            Kinematics::Momenta { p1, p2 } => (p1.norm() / self.m1).max(p2.norm() / self.m2) / units.c,
        };
        if !(ratio < VELOCITY_GUARD) {
            return Err(Error::VelocityGuard(ratio));
        }
        Ok(())
    }

    /// Particle labels exchanged.
    pub fn swapped(&self) -> Self {
        let kinematics = match self.kinematics {
            Kinematics::Velocities { v1, v2 } => Kinematics::Velocities { v1: v2, v2: v1 },
            Kinematics::Momenta { p1, p2 } => Kinematics::Momenta { p1: p2, p2: p1 },
        };
        Self {
            m1: self.m2,
            m2: self.m1,
            e1: self.e2,
            e2: self.e1,
            r1: self.r2,
            r2: self.r1,
            kinematics,
        }
    }

    pub fn translated(&self, shift: &Vec3) -> Self {
        Self {
            r1: self.r1 + shift,
            r2: self.r2 + shift,
            ..*self
        }
    }
}

/// Named terms of a matter Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LagrangianBreakdown {
    pub rest_mass: f64,
    pub newton_kinetic: f64,
    pub p4_kinetic: f64,
    pub newton_potential: f64,
    pub phi_squared: f64,
    pub kinetic_phi_cross: f64,
    pub coulomb: f64,
    pub darwin_velocity: f64,
    pub external_coupling: f64,
    pub external_field: f64,
    pub total: f64,
}

impl LagrangianBreakdown {
    pub fn term_sum(&self) -> f64 {
        self.rest_mass + self.total_without_rest()
    }

    /// Sum of every term except `rest_mass`, without the cancellation of
    /// `total - rest_mass`.
    pub fn total_without_rest(&self) -> f64 {
        self.newton_kinetic
            + self.p4_kinetic
            + self.newton_potential
            + self.phi_squared
            + self.kinetic_phi_cross
            + self.coulomb
            + self.darwin_velocity
            + self.external_coupling
            + self.external_field
    }

    fn finish(mut self) -> Self {
        self.total = self.term_sum();
        self
    }

    fn merge(self, other: &Self) -> Self {
        Self {
            rest_mass: self.rest_mass + other.rest_mass,
            newton_kinetic: self.newton_kinetic + other.newton_kinetic,
            p4_kinetic: self.p4_kinetic + other.p4_kinetic,
            newton_potential: self.newton_potential + other.newton_potential,
            phi_squared: self.phi_squared + other.phi_squared,
            kinetic_phi_cross: self.kinetic_phi_cross + other.kinetic_phi_cross,
            coulomb: self.coulomb + other.coulomb,
            darwin_velocity: self.darwin_velocity + other.darwin_velocity,
            external_coupling: self.external_coupling + other.external_coupling,
            external_field: self.external_field + other.external_field,
            total: 0.0,
        }
        .finish()
    }
}

/// `-m c^2 sqrt(-(g00 + g_ab v^a v^b / c^2))` with the metric evaluated at `phi(x)`.
pub fn exact_point_lagrangian(m: f64, x: &Vec3, v: &Vec3, ctx: &PpnContext) -> Result<f64> {
    ctx.validate()?;
    let c2 = ctx.c2();
    let y = ctx.phi_at(x) / c2;
    let g00 = -1.0 - 2.0 * y - 2.0 * ctx.beta * y * y;
    let gab = 1.0 - 2.0 * ctx.gamma * y;
    let arg = -(g00 + gab * v.norm_squared() / c2);
    if !(arg > 0.0) {
        return Err(Error::Superluminal(v.norm() / ctx.c()));
    }
    Ok(-m * c2 * arg.sqrt())
}

/// [`exact_point_lagrangian`] plus `m c^2`, evaluated without cancellation.
pub fn exact_point_lagrangian_without_rest(m: f64, x: &Vec3, v: &Vec3, ctx: &PpnContext) -> Result<f64> {
    ctx.validate()?;
    let c2 = ctx.c2();
    let y = ctx.phi_at(x) / c2;
    let gab = 1.0 - 2.0 * ctx.gamma * y;
    // 1 - arg, where arg = -(g00 + g_ab v^2 / c^2).
    let deficit = -2.0 * y - 2.0 * ctx.beta * y * y + gab * v.norm_squared() / c2;
    let arg = 1.0 - deficit;
    if !(arg > 0.0) {
        return Err(Error::Superluminal(v.norm() / ctx.c()));
    }
    Ok(m * c2 * deficit / (1.0 + arg.sqrt()))
}

/// Expanded point Lagrangian through `1/c^2`, term by term.
pub fn pn_point_lagrangian(m: f64, x: &Vec3, v: &Vec3, ctx: &PpnContext) -> Result<LagrangianBreakdown> {
    ctx.validate()?;
    let ratio = v.norm() / ctx.c();
    if !(ratio < VELOCITY_GUARD) {
        return Err(Error::VelocityGuard(ratio));
    }
    let c2 = ctx.c2();
    let phi = ctx.phi_at(x);
    let v2 = v.norm_squared();
    Ok(LagrangianBreakdown {
        rest_mass: -m * c2,
        newton_kinetic: 0.5 * m * v2,
        p4_kinetic: m * v2 * v2 / (8.0 * c2),
        newton_potential: -m * phi,
        phi_squared: -(2.0 * ctx.beta - 1.0) * m * phi * phi / (2.0 * c2),
        kinetic_phi_cross: -(2.0 * ctx.gamma + 1.0) * 0.5 * m * phi * v2 / c2,
        ..Default::default()
    }
    .finish())
}

/// Flat-space Darwin Lagrangian (no rest energies).
pub fn darwin_lagrangian(state: &TwoParticleState, units: &UnitSystem) -> Result<f64> {
    let (v1, v2) = state.velocities()?;
    let rel = state.separation()?;
    let r = rel.norm();
    let c2 = units.c2();
    let kinetic = |m: f64, v: &Vec3| {
        let s = v.norm_squared();
        0.5 * m * s + m * s * s / (8.0 * c2)
    };
    let k12 = state.e1 * state.e2 * units.coulomb_constant();
    Ok(kinetic(state.m1, &v1) + kinetic(state.m2, &v2) - k12 / r
        + k12 / (2.0 * c2 * r) * (v1.dot(&v2) + v1.dot(&rel) * v2.dot(&rel) / (r * r)))
}

/// Gravity-corrected two-particle Lagrangian with the electromagnetic sector.
///
/// Each particle sees `phi(r_i)` from the linear profile of `ctx`; the
/// Coulomb and field prefactors use the potential at the centre of mass.
pub fn total_lagrangian(
    state: &TwoParticleState,
    ctx: &PpnContext,
    fields: &FieldConfiguration,
    t: f64,
) -> Result<LagrangianBreakdown> {
    state.validate(&ctx.units)?;
    let (v1, v2) = state.velocities()?;
    let p1 = pn_point_lagrangian(state.m1, &state.r1, &v1, ctx)?;
    let p2 = pn_point_lagrangian(state.m2, &state.r2, &v2, ctx)?;
    let em = em_lagrangian_terms(state, fields, t, ctx)?;
    let em = LagrangianBreakdown {
        coulomb: em.coulomb,
        darwin_velocity: em.darwin_velocity,
        external_coupling: em.external_coupling,
        external_field: em.external_field,
        ..Default::default()
    };
    Ok(p1.merge(&p2).merge(&em))
}

/// Exact point Lagrangians for both particles plus the same electromagnetic
/// terms as [`total_lagrangian`]; the reference for order checks.
pub fn exact_matter_lagrangian(
    state: &TwoParticleState,
    ctx: &PpnContext,
    fields: &FieldConfiguration,
    t: f64,
) -> Result<f64> {
    let (v1, v2) = state.velocities()?;
    let em = em_lagrangian_terms(state, fields, t, ctx)?;
    Ok(exact_point_lagrangian(state.m1, &state.r1, &v1, ctx)?
        + exact_point_lagrangian(state.m2, &state.r2, &v2, ctx)?
        + em.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn units() -> UnitSystem {
        UnitSystem::atomic()
    }

    fn sample_state() -> TwoParticleState {
        TwoParticleState::with_velocities(
            1.0,
            1836.0,
            1.0,
            Vec3::new(0.8, 0.3, -0.2),
            Vec3::new(-0.1, 0.0, 0.05),
            Vec3::new(0.2, 0.9, -0.3),
            Vec3::new(-0.001, 0.0005, 0.0),
        )
    }

    #[test]
    fn exact_point_limits() {
        let flat = PpnContext::flat(units());
        let c2 = units().c2();
        let l0 = exact_point_lagrangian(2.0, &Vec3::zeros(), &Vec3::zeros(), &flat).unwrap();
        assert_relative_eq!(l0, -2.0 * c2, max_relative = 1e-15);
        let v = Vec3::new(30.0, 0.0, 0.0);
        let l = exact_point_lagrangian(2.0, &Vec3::zeros(), &v, &flat).unwrap();
        assert_relative_eq!(l, -2.0 * c2 * (1.0 - 900.0 / c2).sqrt(), max_relative = 1e-15);
        let fast = Vec3::new(units().c * 1.01, 0.0, 0.0);
        assert!(matches!(
            exact_point_lagrangian(1.0, &Vec3::zeros(), &fast, &flat),
            Err(Error::Superluminal(_))
        ));
    }

    #[test]
    fn rest_free_form_agrees() {
        let ctx = PpnContext::from_ratio(units(), 0.8, 1.1, -2e-3).unwrap();
        let v = Vec3::new(3.0, -1.0, 2.0);
        let x = Vec3::new(0.1, 0.2, 0.3);
        let a = exact_point_lagrangian(1.5, &x, &v, &ctx).unwrap() + 1.5 * units().c2();
        let b = exact_point_lagrangian_without_rest(1.5, &x, &v, &ctx).unwrap();
        assert!((a - b).abs() <= 1e-11 * units().c2());
    }

    #[test]
    fn pn_point_hand_values() {
        let flat = PpnContext::flat(units());
        let b = pn_point_lagrangian(1.0, &Vec3::zeros(), &Vec3::zeros(), &flat).unwrap();
        assert_eq!(b.total, -units().c2());

        let ctx = PpnContext::from_ratio(units(), 0.4, 1.0, -1e-6).unwrap();
        let still = pn_point_lagrangian(1.0, &Vec3::zeros(), &Vec3::zeros(), &ctx).unwrap();
        assert_eq!(still.kinetic_phi_cross, 0.0);

        let ctx = PpnContext::from_ratio(units(), 1.0, 1.0, -1e-6).unwrap();
        let c2 = units().c2();
        let v = Vec3::new(0.01 * units().c, 0.0, 0.0);
        let b = pn_point_lagrangian(1.0, &Vec3::zeros(), &v, &ctx).unwrap();
        assert_relative_eq!(b.kinetic_phi_cross, 1.5e-10 * c2, max_relative = 1e-12);
        assert_relative_eq!(b.newton_potential, 1e-6 * c2, max_relative = 1e-14);
        assert_relative_eq!(b.phi_squared, -0.5e-12 * c2, max_relative = 1e-12);
        assert_relative_eq!(b.p4_kinetic, 1e-8 * c2 / 8.0, max_relative = 1e-12);
        assert_eq!(b.total, b.term_sum());
    }

    #[test]
    fn darwin_static_is_coulomb() {
        let s = TwoParticleState::with_velocities(
            1.0,
            2.0,
            1.0,
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::zeros(),
            Vec3::zeros(),
            Vec3::zeros(),
        );
        // e1 e2 = -1, r = 2: -e1 e2 k / r = +k/2.
        let l = darwin_lagrangian(&s, &units()).unwrap();
        assert_relative_eq!(l, 0.5 * units().coulomb_constant(), max_relative = 1e-15);
    }

    #[test]
    fn darwin_term_by_term() {
        // Independent expansion in components.
        let s = sample_state();
        let u = units();
        let (v1, v2) = s.velocities().unwrap();
        let d = [s.r1.x - s.r2.x, s.r1.y - s.r2.y, s.r1.z - s.r2.z];
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        let a1 = [v1.x, v1.y, v1.z];
        let a2 = [v2.x, v2.y, v2.z];
        let q = s.e1 * s.e2 / (4.0 * std::f64::consts::PI * u.epsilon0);
        let c2 = u.c * u.c;
        let expected = s.m1 * dot(&a1, &a1) / 2.0
            + s.m2 * dot(&a2, &a2) / 2.0
            + s.m1 * dot(&a1, &a1).powi(2) / (8.0 * c2)
            + s.m2 * dot(&a2, &a2).powi(2) / (8.0 * c2)
            - q / r
            + q * dot(&a1, &a2) / (2.0 * c2 * r)
            + q * dot(&a1, &d) * dot(&a2, &d) / (2.0 * c2 * r.powi(3));
        assert_relative_eq!(darwin_lagrangian(&s, &u).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn total_reduces_to_darwin_in_flat_space() {
        let s = sample_state();
        let flat = PpnContext::flat(units());
        let t = total_lagrangian(&s, &flat, &FieldConfiguration::none(), 0.0).unwrap();
        let expected = darwin_lagrangian(&s, &units()).unwrap() - (s.m1 + s.m2) * units().c2();
        assert_relative_eq!(t.total, expected, max_relative = 1e-14);
    }

    #[test]
    fn gamma_derivative_of_static_total() {
        let s = sample_state().with_kinematics(Kinematics::Velocities {
            v1: Vec3::zeros(),
            v2: Vec3::zeros(),
        });
        let x = -3e-5;
        let ctx = PpnContext::from_ratio(units(), 1.0, 1.0, x).unwrap();
        let h = 1e-3;
        let lp = total_lagrangian(&s, &ctx.with_gamma(1.0 + h).unwrap(), &FieldConfiguration::none(), 0.0)
            .unwrap()
            .total;
        let lm = total_lagrangian(&s, &ctx.with_gamma(1.0 - h).unwrap(), &FieldConfiguration::none(), 0.0)
            .unwrap()
            .total;
        let r = s.separation().unwrap().norm();
        let expected = -x * s.e1 * s.e2 * units().coulomb_constant() / r;
        // Rest energies cancel only to rounding in the difference.
        let noise = 4.0 * f64::EPSILON * (s.m1 + s.m2) * units().c2() / h;
        assert!(((lp - lm) / (2.0 * h) - expected).abs() <= 1e-8 * expected.abs() + noise);
    }

    #[test]
    fn representation_and_guards() {
        let s = TwoParticleState::with_momenta(1.0, 1.0, 1.0, Vec3::x(), Vec3::zeros(), Vec3::zeros(), Vec3::zeros());
        assert!(matches!(
            darwin_lagrangian(&s, &units()),
            Err(Error::WrongRepresentation { .. })
        ));
        let same = TwoParticleState::with_velocities(1.0, 1.0, 1.0, Vec3::x(), Vec3::x(), Vec3::zeros(), Vec3::zeros());
        assert_eq!(darwin_lagrangian(&same, &units()), Err(Error::CoincidentParticles));
        let fast = TwoParticleState::with_velocities(
            1.0,
            1.0,
            1.0,
            Vec3::x(),
            Vec3::zeros(),
            Vec3::new(0.5 * units().c, 0.0, 0.0),
            Vec3::zeros(),
        );
        assert!(matches!(fast.validate(&units()), Err(Error::VelocityGuard(_))));
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c)| Vec3::new(a, b, c))
    }

    proptest! {
        #[test]
        fn exchange_and_translation_symmetry(
            r1 in vec3(), r2 in vec3(), v1 in vec3(), v2 in vec3(), shift in vec3(),
            m1 in 0.5f64..5.0, m2 in 0.5f64..5.0, x in -1e-4f64..1e-4, g in vec3(),
        ) {
            prop_assume!((r1 - r2).norm() > 0.1);
            let s = TwoParticleState::with_velocities(m1, m2, 1.0, r1, r2, v1, v2);
            let d = darwin_lagrangian(&s, &units()).unwrap();
            let ds = darwin_lagrangian(&s.swapped(), &units()).unwrap();
            prop_assert!((d - ds).abs() <= 1e-12 * d.abs().max(1.0));

            let ctx = PpnContext::from_ratio(units(), 0.7, 1.3, x).unwrap()
                .with_gradient(g * 1e-3, Vec3::zeros()).unwrap();
            let none = FieldConfiguration::none();
            let l = total_lagrangian(&s, &ctx, &none, 0.0).unwrap();
            let ls = total_lagrangian(&s.swapped(), &ctx, &none, 0.0).unwrap();
            let scale = (m1 + m2) * units().c2();
            prop_assert!((l.total - ls.total).abs() <= 1e-13 * scale);
            prop_assert!((l.total - l.term_sum()).abs() <= 1e-15 * scale);

            let moved_ctx = ctx.with_gradient(ctx.grad_phi, ctx.anchor + shift).unwrap();
            let lt = total_lagrangian(&s.translated(&shift), &moved_ctx, &none, 0.0).unwrap();
            prop_assert!((l.total - lt.total).abs() <= 1e-13 * scale);
        }
    }
}
