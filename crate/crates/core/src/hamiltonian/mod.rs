//! Closed-form Hamiltonians: lab frame, centre-of-mass split, the final
//! gravity-corrected set, the composite point particle, the cross-term
//! decoupling map and the atom-light coupling.
//!
//! Everything is classical: operator orderings collapse because the
//! potential is constant over the atom, and Hermitian-conjugate partners
//! double the corresponding classical term.

mod com;
mod decoupling;
mod lab;
mod light;
mod point;

pub use com::{h_com_split, h_final, internal_hamiltonian_flat};
pub use decoupling::{cross_term_decoupling, cross_term_recoupling, DECOUPLING_TOLERANCE};
pub use lab::h_lab_new;
pub use light::{atom_light_terms, dipole_self_energy, SelfTermWidth};
pub use point::{composite_identity_residual, exact_geodesic_hamiltonian, h_point, wrong_split_residual};

use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::UnitSystem;
use crate::lagrangian::{TwoParticleState, VELOCITY_GUARD};
use crate::Vec3;

/// Ordered list of named summands.
///
/// Serialises as a JSON object in insertion order with a trailing `total`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TermBreakdown {
    terms: Vec<(&'static str, f64)>,
}

impl TermBreakdown {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: &'static str, value: f64) {
        self.terms.push((name, value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    pub fn total(&self) -> f64 {
        self.terms.iter().map(|(_, v)| v).sum()
    }

    /// Total without the listed summands.
    pub fn total_without(&self, skip: &[&str]) -> f64 {
        self.terms.iter().filter(|(n, _)| !skip.contains(n)).map(|(_, v)| v).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        self.terms.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Serialize for TermBreakdown {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.terms.len() + 1))?;
        for (name, value) in &self.terms {
            map.serialize_entry(name, value)?;
        }
        map.serialize_entry("total", &self.total())?;
        map.end()
    }
}

/// Centre-of-mass phase-space point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComState {
    pub m1: f64,
    pub m2: f64,
    pub e1: f64,
    pub e2: f64,
    /// Centre-of-mass position `R`.
    pub centre: Vec3,
    /// Total momentum `P`.
    pub total_momentum: Vec3,
    /// Relative position `r = r1 - r2`.
    pub relative: Vec3,
    /// Relative momentum conjugate to `r`.
    pub relative_momentum: Vec3,
}

impl ComState {
    pub fn from_lab(state: &TwoParticleState) -> Result<Self> {
        let (p1, p2) = state.momenta()?;
        let m = state.total_mass();
        Ok(Self {
            m1: state.m1,
            m2: state.m2,
            e1: state.e1,
            e2: state.e2,
            centre: state.centre_of_mass(),
            total_momentum: p1 + p2,
            relative: state.r1 - state.r2,
            relative_momentum: (p1 * state.m2 - p2 * state.m1) / m,
        })
    }

    pub fn to_lab(&self) -> TwoParticleState {
        let m = self.total_mass();
        let (a1, a2) = (self.m1 / m, self.m2 / m);
        TwoParticleState {
            m1: self.m1,
            m2: self.m2,
            e1: self.e1,
            e2: self.e2,
            r1: self.centre + self.relative * a2,
            r2: self.centre - self.relative * a1,
            kinematics: crate::lagrangian::Kinematics::Momenta {
                p1: self.total_momentum * a1 + self.relative_momentum,
                p2: self.total_momentum * a2 - self.relative_momentum,
            },
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2
    }

    pub fn reduced_mass(&self) -> f64 {
        self.m1 * self.m2 / self.total_mass()
    }

    /// `m1 - m2`.
    pub fn mass_asymmetry(&self) -> f64 {
        self.m1 - self.m2
    }

    /// `sum_k e_k (r_k - R)`.
    pub fn dipole(&self) -> Vec3 {
        self.relative * ((self.e1 * self.m2 - self.e2 * self.m1) / self.total_mass())
    }

    /// Bohr radius of the relative Coulomb problem.
    pub fn bohr_radius(&self, units: &UnitSystem) -> f64 {
        units.hbar * units.hbar / (self.reduced_mass() * (self.e1 * self.e2).abs() * units.coulomb_constant())
    }

    pub fn validate(&self, units: &UnitSystem) -> Result<()> {
        if !(self.m1 > 0.0 && self.m2 > 0.0 && self.m1.is_finite() && self.m2.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "masses must be positive, got {} and {}",
                self.m1, self.m2
            )));
        }
        if self.relative.norm() == 0.0 {
            return Err(Error::CoincidentParticles);
        }
        let ratio = (self.total_momentum.norm() / self.total_mass())
            .max(self.relative_momentum.norm() / self.reduced_mass())
            / units.c;
        if !(ratio < VELOCITY_GUARD) {
            return Err(Error::VelocityGuard(ratio));
        }
        Ok(())
    }

    /// `P -> -P`.
    pub fn with_reversed_total_momentum(&self) -> Self {
        Self {
            total_momentum: -self.total_momentum,
            ..*self
        }
    }

    /// Particle labels exchanged: `r -> -r`, `p -> -p`.
    pub fn swapped(&self) -> Self {
        Self {
            m1: self.m2,
            m2: self.m1,
            e1: self.e2,
            e2: self.e1,
            relative: -self.relative,
            relative_momentum: -self.relative_momentum,
            ..*self
        }
    }
}

/// Term-by-term centre-of-mass Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonianReport {
    #[serde(rename = "H_C")]
    pub central: TermBreakdown,
    #[serde(rename = "H_A")]
    pub internal: TermBreakdown,
    #[serde(rename = "H_AL")]
    pub atom_light: TermBreakdown,
    #[serde(rename = "H_L")]
    pub field: TermBreakdown,
    #[serde(rename = "H_X")]
    pub cross: TermBreakdown,
    /// Whether terms linear in `r . grad phi` were evaluated.
    pub gradient_terms: bool,
    pub total: f64,
}

impl HamiltonianReport {
    fn assemble(
        central: TermBreakdown,
        internal: TermBreakdown,
        atom_light: TermBreakdown,
        field: TermBreakdown,
        cross: TermBreakdown,
        gradient_terms: bool,
    ) -> Self {
        let total = central.total() + internal.total() + atom_light.total() + field.total() + cross.total();
        Self {
            central,
            internal,
            atom_light,
            field,
            cross,
            gradient_terms,
            total,
        }
    }

    pub fn parts(&self) -> [(&'static str, &TermBreakdown); 5] {
        [
            ("H_C", &self.central),
            ("H_A", &self.internal),
            ("H_AL", &self.atom_light),
            ("H_L", &self.field),
            ("H_X", &self.cross),
        ]
    }

    /// Total with the smeared polarisation self term removed.
    pub fn total_without_self_term(&self) -> f64 {
        self.total - self.atom_light.get("polarisation_self").unwrap_or(0.0)
    }
}
