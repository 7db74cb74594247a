use super::light::{atom_light_breakdown, SelfTermWidth};
use super::{ComState, HamiltonianReport, TermBreakdown};
use crate::em::{field_energy, FieldConfiguration};
use crate::error::Result;
use crate::geometry::{Frame, PpnContext};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Regime {
    /// Gradient terms kept when present; flat self term.
    Split,
    /// Uniform potential; self term carries the field prefactor.
    Final,
}

/// Centre-of-mass Hamiltonian with the `r . grad phi` terms of a linear
/// potential profile included whenever `ctx` carries a gradient.
///
/// The Coulomb prefactor is split as `phi/c^2 V` in the central part and
/// `gamma phi/c^2 V` in the internal part, so this is the exact image of
/// [`super::h_lab_new`] up to the dropped `(2 beta - 1) mu (r . grad phi)^2 / 2c^2`.
pub fn h_com_split(
    com: &ComState,
    fields: &FieldConfiguration,
    ctx: &PpnContext,
    t: f64,
    width: SelfTermWidth,
) -> Result<HamiltonianReport> {
    build(com, fields, ctx, t, width, Regime::Split)
}

/// Final Hamiltonian set with the potential frozen at the centre of mass.
pub fn h_final(
    com: &ComState,
    fields: &FieldConfiguration,
    ctx: &PpnContext,
    t: f64,
    width: SelfTermWidth,
) -> Result<HamiltonianReport> {
    build(com, fields, ctx, t, width, Regime::Final)
}

/// Flat-metric internal Hamiltonian: the internal part without its metric
/// kinetic and Coulomb corrections.
pub fn internal_hamiltonian_flat(com: &ComState, ctx: &PpnContext) -> Result<TermBreakdown> {
    let uniform = ctx.at_point(&com.centre)?.uniform();
    Ok(internal(com, &uniform, false))
}

fn coulomb(com: &ComState, ctx: &PpnContext) -> f64 {
    com.e1 * com.e2 * ctx.units.coulomb_constant() / com.relative.norm()
}

fn internal(com: &ComState, ctx: &PpnContext, metric: bool) -> TermBreakdown {
    let (m, mu, dm) = (com.total_mass(), com.reduced_mass(), com.mass_asymmetry());
    let c2 = ctx.c2();
    let x = ctx.phi_over_c2();
    let (r, p) = (com.relative, com.relative_momentum);
    let rn = r.norm();
    let p2 = p.norm_squared();
    let kinetic = p2 / (2.0 * mu);
    let v = coulomb(com, ctx);
    let mass_factor = (com.m1.powi(3) + com.m2.powi(3)) / m.powi(3);

    let mut b = TermBreakdown::new();
    b.push("kinetic", kinetic);
    b.push("p4", -mass_factor * p2 * p2 / (8.0 * mu.powi(3) * c2));
    b.push("coulomb", v);
    b.push("darwin", v / (2.0 * mu * m * c2) * (p2 + p.dot(&r).powi(2) / (rn * rn)));
    if metric {
        b.push("metric_kinetic", 2.0 * ctx.gamma * x * kinetic);
        b.push("metric_coulomb", ctx.gamma * x * v);
        if ctx.has_gradient() {
            let s = ctx.grad_phi.dot(&r);
            b.push(
                "gradient_kinetic",
                -(2.0 * ctx.gamma + 1.0) / (2.0 * c2) * dm / (com.m1 * com.m2) * p2 * s,
            );
        }
    }
    b
}

fn central(com: &ComState, ctx: &PpnContext) -> TermBreakdown {
    let (m, mu) = (com.total_mass(), com.reduced_mass());
    let c2 = ctx.c2();
    let phi = ctx.phi;
    let big_p2 = com.total_momentum.norm_squared();
    let kinetic = com.relative_momentum.norm_squared() / (2.0 * mu);
    let v = coulomb(com, ctx);

    let mut b = TermBreakdown::new();
    b.push("kinetic", big_p2 / (2.0 * m));
    b.push("p4", -big_p2 * big_p2 / (8.0 * m.powi(3) * c2));
    b.push("internal_energy_inertia", -big_p2 / (2.0 * m) * (kinetic + v) / (m * c2));
    b.push("rest_mass_phi", m * phi);
    b.push("internal_kinetic_phi", kinetic * phi / c2);
    b.push("internal_coulomb_phi", v * phi / c2);
    b.push("kinetic_phi", (2.0 * ctx.gamma + 1.0) * big_p2 * phi / (2.0 * m * c2));
    b.push("phi_squared", (2.0 * ctx.beta - 1.0) * m * phi * phi / (2.0 * c2));
    b
}

fn cross(com: &ComState, ctx: &PpnContext) -> TermBreakdown {
    let (m, mu, dm) = (com.total_mass(), com.reduced_mass(), com.mass_asymmetry());
    let c2 = ctx.c2();
    let (big_p, r, p) = (com.total_momentum, com.relative, com.relative_momentum);
    let rn = r.norm();
    let pp = big_p.dot(&p);
    let v = coulomb(com, ctx);

    let mut b = TermBreakdown::new();
    b.push("momentum_correlation", -pp * pp / (2.0 * m * m * mu * c2));
    b.push("coulomb_motion", -v * (big_p.dot(&r) / rn).powi(2) / (2.0 * m * m * c2));
    b.push("asymmetric_kinetic", dm / (2.0 * mu * m * m * c2) * pp * p.norm_squared() / mu);
    b.push(
        "asymmetric_coulomb",
        dm / (2.0 * mu * m * m * c2) * v * (pp + big_p.dot(&r) * r.dot(&p) / (rn * rn)),
    );
    if ctx.has_gradient() {
        let s = ctx.grad_phi.dot(&r);
        b.push("gradient_cross", (2.0 * ctx.gamma + 1.0) / (m * c2) * pp * s);
    }
    b
}

fn build(
    com: &ComState,
    fields: &FieldConfiguration,
    ctx: &PpnContext,
    t: f64,
    width: SelfTermWidth,
    regime: Regime,
) -> Result<HamiltonianReport> {
    com.validate(&ctx.units)?;
    let mut local = ctx.at_point(&com.centre)?;
    if regime == Regime::Final {
        local = local.uniform();
    }
    let self_weight = match regime {
        Regime::Split => 1.0,
        Regime::Final => local.em_prefactor(),
    };
    let atom_light = atom_light_breakdown(com, fields, &local, Frame::Coordinate, t, width, self_weight)?;
    let mut field = TermBreakdown::new();
    field.push("field_energy", field_energy(fields, t, &local, Frame::Coordinate)?);
    Ok(HamiltonianReport::assemble(
        central(com, &local),
        internal(com, &local, true),
        atom_light,
        field,
        cross(com, &local),
        local.has_gradient(),
    ))
}
