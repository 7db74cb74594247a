//! Post-Newtonian two-body atom in a PPN gravitational background.
//!
//! The crate evaluates the expanded Lagrangians and Hamiltonians of a pair of
//! charges bound by electromagnetism in a weak, static, Eddington-Robertson
//! metric, and provides independent numerical checks for each expansion: the
//! exact point Lagrangian, a numerical Legendre transform, coordinate maps,
//! a radial eigenvalue solver and a composite-particle trajectory integrator.

pub mod em;
pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod lagrangian;
pub mod legendre;
pub mod order;
pub mod spectrum;
pub mod trajectory;

/// Cartesian 3-vector in coordinate components.
pub type Vec3 = nalgebra::Vector3<f64>;

pub use error::{Error, Result};
pub use geometry::{Frame, PpnContext, UnitSystem};
pub use lagrangian::{Kinematics, TwoParticleState};
