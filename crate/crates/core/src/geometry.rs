//! Weak-field PPN background: unit system, metric components, tetrads and
//! the conversions between coordinate and physical (tetrad) components.
//!
//! Everything here is evaluated at a single point (the centre of mass of the
//! atom); the metric is taken to be constant over the atom, so no connection
//! or curvature quantities are needed.

use nalgebra::{Matrix3, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// Default weak-field guard on `|phi|/c^2`.
pub const DEFAULT_WEAK_FIELD_LIMIT: f64 = 1e-2;

/// Speed of light in atomic-like code units.
pub const ATOMIC_C: f64 = 137.035999;

/// Code-unit system. `mu0` is derived so that `mu0 * epsilon0 * c^2 == 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub c: f64,
    pub epsilon0: f64,
    pub hbar: f64,
}

impl UnitSystem {
    pub fn new(c: f64, epsilon0: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("c", c), ("epsilon0", epsilon0), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidUnits(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { c, epsilon0, hbar })
    }

    /// Hartree-like atomic units: `hbar = 1`, `4 pi epsilon0 = 1`, `c = 137.036`.
    pub fn atomic() -> Self {
        Self {
            c: ATOMIC_C,
            epsilon0: 1.0 / (4.0 * std::f64::consts::PI),
            hbar: 1.0,
        }
    }

    pub fn with_c(self, c: f64) -> Result<Self> {
        Self::new(c, self.epsilon0, self.hbar)
    }

    pub fn mu0(&self) -> f64 {
        1.0 / (self.epsilon0 * self.c * self.c)
    }

    pub fn c2(&self) -> f64 {
        self.c * self.c
    }

    /// `1 / (4 pi epsilon0)`.
    pub fn coulomb_constant(&self) -> f64 {
        1.0 / (4.0 * std::f64::consts::PI * self.epsilon0)
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::atomic()
    }
}

/// Gravitational background configuration.
///
/// The potential is modelled as the linear profile
/// `phi(x) = phi + grad_phi . (x - anchor)`, i.e. the monopole expansion
/// about the anchor point. With `grad_phi = 0` the potential is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpnContext {
    pub units: UnitSystem,
    pub gamma: f64,
    pub beta: f64,
    pub phi: f64,
    pub grad_phi: Vec3,
    pub anchor: Vec3,
    pub weak_field_limit: f64,
}

impl PpnContext {
    pub fn new(units: UnitSystem, gamma: f64, beta: f64, phi: f64) -> Result<Self> {
        let ctx = Self {
            units,
            gamma,
            beta,
            phi,
            grad_phi: Vec3::zeros(),
            anchor: Vec3::zeros(),
            weak_field_limit: DEFAULT_WEAK_FIELD_LIMIT,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    /// Flat spacetime, general relativity parameters.
    pub fn flat(units: UnitSystem) -> Self {
        Self {
            units,
            gamma: 1.0,
            beta: 1.0,
            phi: 0.0,
            grad_phi: Vec3::zeros(),
            anchor: Vec3::zeros(),
            weak_field_limit: DEFAULT_WEAK_FIELD_LIMIT,
        }
    }

    /// Build from the dimensionless ratio `phi / c^2`.
    pub fn from_ratio(units: UnitSystem, gamma: f64, beta: f64, phi_over_c2: f64) -> Result<Self> {
        Self::new(units, gamma, beta, phi_over_c2 * units.c2())
    }

    pub fn with_gradient(mut self, grad_phi: Vec3, anchor: Vec3) -> Result<Self> {
        self.grad_phi = grad_phi;
        self.anchor = anchor;
        self.validate()?;
        Ok(self)
    }

    pub fn with_weak_field_limit(mut self, limit: f64) -> Result<Self> {
        self.weak_field_limit = limit;
        self.validate()?;
        Ok(self)
    }

    pub fn with_phi(mut self, phi: f64) -> Result<Self> {
        self.phi = phi;
        self.validate()?;
        Ok(self)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    /// Background re-expanded about `x`: `phi` becomes `phi(x)`, the gradient is kept.
    pub fn at_point(&self, x: &Vec3) -> Result<Self> {
        let mut ctx = *self;
        ctx.phi = self.phi_at(x);
        ctx.anchor = *x;
        ctx.validate()?;
        Ok(ctx)
    }

    /// Same background with the gradient switched off.
    pub fn uniform(mut self) -> Self {
        self.grad_phi = Vec3::zeros();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.beta.is_finite()) {
            return Err(Error::InvalidParameter("gamma and beta must be finite".into()));
        }
        if !self.phi.is_finite() || !self.grad_phi.iter().all(|g| g.is_finite()) {
            return Err(Error::InvalidParameter("phi and grad_phi must be finite".into()));
        }
        if !(self.weak_field_limit > 0.0 && self.weak_field_limit < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "weak-field limit must lie in (0, 1), got {}",
                self.weak_field_limit
            )));
        }
        let ratio = self.phi_over_c2().abs();
        if ratio >= self.weak_field_limit {
            return Err(Error::WeakFieldViolation {
                ratio,
                limit: self.weak_field_limit,
            });
        }
        Ok(())
    }

    pub fn c(&self) -> f64 {
        self.units.c
    }

    pub fn c2(&self) -> f64 {
        self.units.c2()
    }

    pub fn phi_over_c2(&self) -> f64 {
        self.phi / self.c2()
    }

    /// Linearised potential at `x`.
    pub fn phi_at(&self, x: &Vec3) -> f64 {
        self.phi + self.grad_phi.dot(&(x - self.anchor))
    }

    pub fn has_gradient(&self) -> bool {
        self.grad_phi.iter().any(|g| *g != 0.0)
    }

    /// `1 + (gamma + 1) phi/c^2`, the prefactor on Coulomb and field-energy terms.
    pub fn em_prefactor(&self) -> f64 {
        1.0 + (self.gamma + 1.0) * self.phi_over_c2()
    }
}

/// Covariant and contravariant metric components at working order.
///
/// The `O(c^-5)` time-space entries are exact zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricComponents {
    pub g00: f64,
    pub g0a: [f64; 3],
    pub gab: Matrix3<f64>,
    pub inv00: f64,
    pub inv0a: [f64; 3],
    pub inv_ab: Matrix3<f64>,
    pub sqrt_minus_g: f64,
}

impl MetricComponents {
    pub fn covariant(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = self.g00;
        for a in 0..3 {
            m[(0, a + 1)] = self.g0a[a];
            m[(a + 1, 0)] = self.g0a[a];
            for b in 0..3 {
                m[(a + 1, b + 1)] = self.gab[(a, b)];
            }
        }
        m
    }

    pub fn contravariant(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = self.inv00;
        for a in 0..3 {
            m[(0, a + 1)] = self.inv0a[a];
            m[(a + 1, 0)] = self.inv0a[a];
            for b in 0..3 {
                m[(a + 1, b + 1)] = self.inv_ab[(a, b)];
            }
        }
        m
    }

    /// Largest entry of `g . g^-1 - 1`.
    pub fn inverse_defect(&self) -> f64 {
        let prod = self.covariant() * self.contravariant();
        (prod - Matrix4::identity()).amax()
    }

    /// `-g00 * g11 * g22 * g33`.
    pub fn minus_determinant(&self) -> f64 {
        -self.covariant().determinant()
    }
}

/// Metric at the potential value `ctx.phi`.
pub fn metric_components(ctx: &PpnContext) -> Result<MetricComponents> {
    ctx.validate()?;
    let x = ctx.phi_over_c2();
    let g00 = -1.0 - 2.0 * x - 2.0 * ctx.beta * x * x;
    let spatial = 1.0 - 2.0 * ctx.gamma * x;
    let inv00 = -1.0 + 2.0 * x + (2.0 * ctx.beta - 4.0) * x * x;
    let inv_spatial = 1.0 + 2.0 * ctx.gamma * x;
    Ok(MetricComponents {
        g00,
        g0a: [0.0; 3],
        gab: Matrix3::identity() * spatial,
        inv00,
        inv0a: [0.0; 3],
        inv_ab: Matrix3::identity() * inv_spatial,
        sqrt_minus_g: 1.0 - (3.0 * ctx.gamma - 1.0) * x,
    })
}

/// `sqrt(-g00)` at the anchor potential, from the `O(c^-4)` component.
pub fn lapse(ctx: &PpnContext) -> f64 {
    let x = ctx.phi_over_c2();
    (1.0 + 2.0 * x + 2.0 * ctx.beta * x * x).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerVariant {
    /// Physical spatial metric `(1 - 2 gamma phi/c^2) delta_ab`.
    Metric,
    /// Its inverse `(1 + 2 gamma phi/c^2) delta^ab`.
    Inverse,
}

pub fn spatial_inner(ctx: &PpnContext, u: &Vec3, v: &Vec3, variant: InnerVariant) -> f64 {
    let x = ctx.phi_over_c2();
    let factor = match variant {
        InnerVariant::Metric => 1.0 - 2.0 * ctx.gamma * x,
        InnerVariant::Inverse => 1.0 + 2.0 * ctx.gamma * x,
    };
    factor * u.dot(v)
}

/// Which components a field or dipole tuple refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Coordinate,
    Tetrad,
}

/// Diagonal orthonormal frame `e_0 = (1 - phi/c^2) d_0`, `e_a = (1 + gamma phi/c^2) d_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tetrad {
    pub e0_factor: f64,
    pub ea_factor: f64,
}

impl Tetrad {
    pub fn new(ctx: &PpnContext) -> Self {
        let x = ctx.phi_over_c2();
        Self {
            e0_factor: 1.0 - x,
            ea_factor: 1.0 + ctx.gamma * x,
        }
    }

    /// Gram matrix `g(e_mu, e_nu)`.
    pub fn gram(&self, metric: &MetricComponents) -> Matrix4<f64> {
        let scale = Matrix4::from_diagonal(&nalgebra::Vector4::new(
            self.e0_factor,
            self.ea_factor,
            self.ea_factor,
            self.ea_factor,
        ));
        scale * metric.covariant() * scale
    }

    /// Largest entry of `g(e_mu, e_nu) - eta_mu_nu`.
    pub fn orthonormality_defect(&self, metric: &MetricComponents) -> f64 {
        let eta = Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0));
        (self.gram(metric) - eta).amax()
    }
}

/// Coordinate `E = -dA/dt`, `B = curl A` to tetrad components.
pub fn to_physical_fields(ctx: &PpnContext, e_coord: &Vec3, b_coord: &Vec3) -> (Vec3, Vec3) {
    let x = ctx.phi_over_c2();
    let e_phys = e_coord * ((1.0 + ctx.gamma * x) / lapse(ctx));
    let b_phys = b_coord * (1.0 + 2.0 * ctx.gamma * x);
    (e_phys, b_phys)
}

/// Coordinate dipole moment to its metric (tetrad) components.
pub fn to_physical_dipole(ctx: &PpnContext, d_coord: &Vec3) -> Vec3 {
    d_coord * (1.0 - ctx.gamma * ctx.phi_over_c2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ctx(gamma: f64, beta: f64, x: f64) -> PpnContext {
        PpnContext::from_ratio(UnitSystem::atomic(), gamma, beta, x).unwrap()
    }

    #[test]
    fn flat_limit_is_minkowski() {
        let m = metric_components(&ctx(1.0, 1.0, 0.0)).unwrap();
        let eta = Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0));
        assert_eq!(m.covariant(), eta);
        assert_eq!(m.sqrt_minus_g, 1.0);
    }

    #[test]
    fn g00_hand_value() {
        let m = metric_components(&ctx(1.0, 1.0, -1e-6)).unwrap();
        assert_relative_eq!(m.g00, -1.0 + 2e-6 - 2e-12, max_relative = 1e-15);
    }

    #[test]
    fn weak_field_guard() {
        let err = PpnContext::from_ratio(UnitSystem::atomic(), 1.0, 1.0, 1e-2).unwrap_err();
        assert!(matches!(err, Error::WeakFieldViolation { .. }));
        assert!(PpnContext::from_ratio(UnitSystem::atomic(), 1.0, 1.0, 0.99e-2).is_ok());
        let relaxed = PpnContext::flat(UnitSystem::atomic()).with_weak_field_limit(0.5).unwrap();
        assert!(relaxed.with_phi(0.1 * UnitSystem::atomic().c2()).is_ok());
    }

    #[test]
    fn mu0_identity() {
        let u = UnitSystem::new(3.7, 0.21, 1.3).unwrap();
        assert_relative_eq!(u.mu0() * u.epsilon0 * u.c * u.c, 1.0, max_relative = 1e-15);
        assert!(UnitSystem::new(0.0, 1.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn spatial_inner_values() {
        let u = Vec3::new(1.0, 0.0, 0.0);
        let flat = ctx(1.0, 1.0, 0.0);
        assert_eq!(spatial_inner(&flat, &u, &u, InnerVariant::Metric), 1.0);
        assert_eq!(spatial_inner(&flat, &u, &u, InnerVariant::Inverse), 1.0);
        let c = ctx(1.0, 1.0, 1e-4);
        assert_relative_eq!(spatial_inner(&c, &u, &u, InnerVariant::Metric), 0.9998, max_relative = 1e-14);
    }

    #[test]
    fn physical_field_values() {
        let c = ctx(1.0, 1.0, -1e-6);
        let (_, b) = to_physical_fields(&c, &Vec3::zeros(), &Vec3::new(0.0, 0.0, 1.0));
        assert_relative_eq!(b.z, 1.0 - 2e-6, max_relative = 1e-15);
        let flat = ctx(1.3, 0.2, 0.0);
        let e = Vec3::new(0.3, -1.0, 2.0);
        assert_eq!(to_physical_fields(&flat, &e, &e), (e, e));
    }

    #[test]
    fn physical_dipole_values() {
        let c = ctx(2.0, 1.0, 1e-6);
        let d = to_physical_dipole(&c, &Vec3::new(1.0, 0.0, 0.0));
        assert_relative_eq!(d.x, 1.0 - 2e-6, max_relative = 1e-15);
        let flat = ctx(2.0, 1.0, 0.0);
        assert_eq!(to_physical_dipole(&flat, &Vec3::new(1.0, 2.0, 3.0)), Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn physical_dipole_round_trip() {
        let x = 3e-4;
        let c = ctx(1.4, 1.0, x);
        let d = Vec3::new(0.4, -2.0, 1.0);
        let back = to_physical_dipole(&c, &d) * (1.0 + c.gamma * x);
        assert!((back - d).amax() <= 10.0 * x * x * d.amax());
    }

    #[test]
    fn field_invariant_scaling() {
        // E_phys . B_phys = (1 + gamma x)(1 + 2 gamma x)/sqrt(-g00) E.B
        let x = 2e-5;
        let c = ctx(0.7, 1.2, x);
        let e = Vec3::new(1.0, 2.0, -0.5);
        let b = Vec3::new(0.3, 0.1, 0.9);
        let (ep, bp) = to_physical_fields(&c, &e, &b);
        let expected = (1.0 + 3.0 * c.gamma * x - x) * e.dot(&b);
        assert!((ep.dot(&bp) - expected).abs() <= 10.0 * x * x * e.dot(&b).abs());
    }

    #[test]
    fn determinant_consistency() {
        for &x in &[1e-3, -4e-4, 2e-5] {
            let m = metric_components(&ctx(0.8, 1.3, x)).unwrap();
            let diff = m.sqrt_minus_g.powi(2) - m.minus_determinant();
            assert!(diff.abs() <= 20.0 * x * x, "x={x} diff={diff}");
        }
    }
}
