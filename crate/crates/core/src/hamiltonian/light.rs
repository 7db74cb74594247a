use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ComState, TermBreakdown};
use crate::em::FieldConfiguration;
use crate::error::{Error, Result};
use crate::geometry::{lapse, to_physical_dipole, to_physical_fields, Frame, PpnContext, UnitSystem};

/// Width of the Gaussian dipole density used to regularise the
/// polarisation self term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SelfTermWidth {
    /// Fraction of the Bohr radius of the relative problem.
    BohrFraction(f64),
    Absolute(f64),
}

impl Default for SelfTermWidth {
    fn default() -> Self {
        Self::BohrFraction(0.1)
    }
}

impl SelfTermWidth {
    pub fn resolve(&self, com: &ComState, units: &UnitSystem) -> Result<f64> {
        let sigma = match *self {
            Self::BohrFraction(f) => f * com.bohr_radius(units),
            Self::Absolute(s) => s,
        };
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("self-term width must be > 0, got {sigma}")));
        }
        Ok(sigma)
    }
}

/// `(1/2 eps0) Int P_perp^2` for a dipole `d` smeared into a Gaussian of width `sigma`:
/// `d^2 / (24 pi^(3/2) eps0 sigma^3)`.
pub fn dipole_self_energy(d2: f64, sigma: f64, epsilon0: f64) -> f64 {
    d2 / (24.0 * PI.powf(1.5) * epsilon0 * sigma.powi(3))
}

/// Atom-light coupling in dipole approximation, in coordinate or tetrad components.
///
/// The self term carries the field prefactor `1 + (gamma+1) phi/c^2`.
pub fn atom_light_terms(
    com: &ComState,
    fields: &FieldConfiguration,
    ctx: &PpnContext,
    frame: Frame,
    t: f64,
    width: SelfTermWidth,
) -> Result<TermBreakdown> {
    let local = ctx.at_point(&com.centre)?;
    atom_light_breakdown(com, fields, &local, frame, t, width, local.em_prefactor())
}

pub(super) fn atom_light_breakdown(
    com: &ComState,
    fields: &FieldConfiguration,
    ctx: &PpnContext,
    frame: Frame,
    t: f64,
    width: SelfTermWidth,
    self_weight: f64,
) -> Result<TermBreakdown> {
    let sigma = width.resolve(com, &ctx.units)?;
    let d = com.dipole();
    let e = fields.e_coord(&com.centre, t);
    let bf = fields.b_coord(&com.centre, t);
    let (m, mu) = (com.total_mass(), com.reduced_mass());
    let internal = -com.mass_asymmetry() / (2.0 * com.m1 * com.m2);
    let (big_p, p) = (com.total_momentum, com.relative_momentum);
    let eps0 = ctx.units.epsilon0;

    let mut b = TermBreakdown::new();
    match frame {
        Frame::Coordinate => {
            let dxb = d.cross(&bf);
            b.push("dipole", -d.dot(&e));
            b.push("rontgen", big_p.dot(&dxb) / m);
            b.push("internal_rontgen", internal * p.dot(&dxb));
            b.push("diamagnetic", dxb.norm_squared() / (8.0 * mu));
            b.push("polarisation_self", self_weight * dipole_self_energy(d.norm_squared(), sigma, eps0));
        }
        Frame::Tetrad => {
            let gx = ctx.gamma * ctx.phi_over_c2();
            let dp = to_physical_dipole(ctx, &d);
            let (ep, bp) = to_physical_fields(ctx, &e, &bf);
            let dxb = dp.cross(&bp);
            b.push("dipole", -lapse(ctx) * dp.dot(&ep));
            b.push("rontgen", (1.0 - gx) * big_p.dot(&dxb) / m);
            b.push("internal_rontgen", (1.0 - gx) * internal * p.dot(&dxb));
            b.push("diamagnetic", (1.0 - 2.0 * gx) * dxb.norm_squared() / (8.0 * mu));
            b.push(
                "polarisation_self",
                self_weight * (1.0 + 2.0 * gx) * dipole_self_energy(dp.norm_squared(), sigma, eps0),
            );
        }
    }
    Ok(b)
}
