//! Electromagnetic sector in the PPN background.
//!
//! Internal potentials carry the prefactors `(1 + (gamma+1) phi/c^2)` (scalar)
//! and `(1 - (gamma+1) phi/c^2)` (vector) on top of the quasi-static
//! flat-space solutions. The external field is a prescribed superposition of
//! transverse plane waves in Coulomb gauge.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{metric_components, to_physical_fields, Frame, PpnContext, UnitSystem};
use crate::lagrangian::TwoParticleState;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointCharge {
    pub position: Vec3,
    pub charge: f64,
}

/// Point charges, optionally smeared into Gaussians of width `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeModel {
    pub charges: Vec<PointCharge>,
    pub sigma: f64,
}

impl ChargeModel {
    pub fn new(charges: Vec<PointCharge>, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("smearing width must be >= 0, got {sigma}")));
        }
        let total: f64 = charges.iter().map(|c| c.charge).sum();
        let scale: f64 = charges.iter().map(|c| c.charge.abs()).sum();
        if total.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter(format!("atom must be neutral, total charge {total}")));
        }
        Ok(Self { charges, sigma })
    }

    /// The two charges of a particle state.
    pub fn from_state(state: &TwoParticleState, sigma: f64) -> Result<Self> {
        Self::new(
            vec![
                PointCharge {
                    position: state.r1,
                    charge: state.e1,
                },
                PointCharge {
                    position: state.r2,
                    charge: state.e2,
                },
            ],
            sigma,
        )
    }

    /// Flat-space Coulomb potential without the `1/(4 pi eps0)` factor.
    fn kernel_sum(&self, x: &Vec3) -> Result<f64> {
        let mut acc = 0.0;
        for c in &self.charges {
            let d = (x - c.position).norm();
            if self.sigma > 0.0 {
                let s = std::f64::consts::SQRT_2 * self.sigma;
                acc += c.charge
                    * if d < 1e-8 * self.sigma {
                        2.0 / (std::f64::consts::PI.sqrt() * s)
                    } else {
                        libm::erf(d / s) / d
                    };
            } else {
                if d == 0.0 {
                    return Err(Error::SingularEvaluation);
                }
                acc += c.charge / d;
            }
        }
        Ok(acc)
    }

    /// Charge density (Gaussian smearing; zero away from point charges when `sigma == 0`).
    pub fn density(&self, x: &Vec3) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let norm = (2.0 * PI * self.sigma * self.sigma).powf(-1.5);
        self.charges
            .iter()
            .map(|c| {
                let d2 = (x - c.position).norm_squared();
                c.charge * norm * (-d2 / (2.0 * self.sigma * self.sigma)).exp()
            })
            .sum()
    }
}

/// Internal electric potential with its gravitational prefactor.
pub fn internal_scalar_potential(charges: &ChargeModel, x: &Vec3, ctx: &PpnContext) -> Result<f64> {
    let flat = ctx.units.coulomb_constant() * charges.kernel_sum(x)?;
    Ok(ctx.em_prefactor() * flat)
}

/// Internal quasi-static transverse vector potential with its prefactor.
pub fn internal_vector_potential(state: &TwoParticleState, x: &Vec3, ctx: &PpnContext) -> Result<Vec3> {
    let (v1, v2) = state.velocities()?;
    let mut acc = Vec3::zeros();
    for (q, r, v) in [(state.e1, state.r1, v1), (state.e2, state.r2, v2)] {
        let d = x - r;
        let dn = d.norm();
        if dn == 0.0 {
            return Err(Error::SingularEvaluation);
        }
        acc += (v / dn + d * (v.dot(&d) / dn.powi(3))) * q;
    }
    let prefactor = 1.0 - (ctx.gamma + 1.0) * ctx.phi_over_c2();
    Ok(acc * (prefactor * ctx.units.mu0() / (8.0 * PI)))
}

/// Cubic lattice for the grid checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: Vec3,
    pub half_extent: f64,
    pub spacing: f64,
}

impl GridSpec {
    pub fn new(center: Vec3, half_extent: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Grid(format!("spacing must be > 0, got {spacing}")));
        }
        if !(half_extent > 2.0 * spacing) {
            return Err(Error::Grid("box must hold at least one interior node".into()));
        }
        Ok(Self {
            center,
            half_extent,
            spacing,
        })
    }

    pub fn nodes_per_axis(&self) -> usize {
        (2.0 * self.half_extent / self.spacing).round() as usize + 1
    }

    pub fn refined(&self) -> Self {
        Self {
            spacing: self.spacing / 2.0,
            ..*self
        }
    }

    fn node(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let o = self.center - Vec3::repeat(self.half_extent);
        o + Vec3::new(i as f64, j as f64, k as f64) * self.spacing
    }

    fn check_encloses(&self, charges: &ChargeModel) -> Result<()> {
        for c in &charges.charges {
            let reach = (c.position - self.center).amax() + 6.0 * charges.sigma;
            if reach > self.half_extent {
                return Err(Error::Grid(format!(
                    "box half-extent {} does not enclose charge at {:?} by 6 sigma",
                    self.half_extent, c.position
                )));
            }
        }
        Ok(())
    }
}

/// Relative L2 residual of the discrete Poisson equation
/// `Lap phi_el = -(1/eps0)(1 + (gamma+1) phi/c^2) rho` on the interior nodes,
/// with the 7-point second-order Laplacian applied to the closed-form
/// smeared potential.
pub fn poisson_residual(charges: &ChargeModel, grid: &GridSpec, ctx: &PpnContext) -> Result<f64> {
    if charges.sigma <= 0.0 {
        return Err(Error::Grid("Poisson residual needs smeared charges (sigma > 0)".into()));
    }
    grid.check_encloses(charges)?;
    let n = grid.nodes_per_axis();
    let h2 = grid.spacing * grid.spacing;
    let rhs_factor = -ctx.em_prefactor() / ctx.units.epsilon0;

    let plane = |k: usize| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                out.push(internal_scalar_potential(charges, &grid.node(i, j, k), ctx)?);
            }
        }
        Ok(out)
    };

    let mut below = plane(0)?;
    let mut here = plane(1)?;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 1..n - 1 {
        let above = plane(k + 1)?;
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let idx = i * n + j;
                let lap = (here[idx + n] + here[idx - n] + here[idx + 1] + here[idx - 1] + above[idx] + below[idx]
                    - 6.0 * here[idx])
                    / h2;
                let rhs = rhs_factor * charges.density(&grid.node(i, j, k));
                num += (lap - rhs).powi(2);
                den += rhs * rhs;
            }
        }
        below = std::mem::replace(&mut here, above);
    }
    if den == 0.0 {
        return Err(Error::Grid("right-hand side vanishes on the grid".into()));
    }
    Ok((num / den).sqrt())
}

/// One row of a grid-refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridResidualRow {
    pub h: f64,
    pub residual: f64,
    /// Observed order against the previous (coarser) row.
    pub order: Option<f64>,
}

/// Residuals on `grid` and `refinements` successive halvings of its spacing.
pub fn poisson_convergence(
    charges: &ChargeModel,
    grid: &GridSpec,
    refinements: usize,
    ctx: &PpnContext,
) -> Result<Vec<GridResidualRow>> {
    let mut rows: Vec<GridResidualRow> = Vec::with_capacity(refinements + 1);
    let mut g = *grid;
    for _ in 0..=refinements {
        let residual = poisson_residual(charges, &g, ctx)?;
        let order = rows
            .last()
            .map(|prev| (prev.residual / residual).ln() / (prev.h / g.spacing).ln());
        rows.push(GridResidualRow {
            h: g.spacing,
            residual,
            order,
        });
        g = g.refined();
    }
    Ok(rows)
}

/// Transverse plane wave `A = a cos(k.x - w t + theta)` with `w = c|k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveMode {
    pub amplitude: Vec3,
    pub wavevector: Vec3,
    pub phase: f64,
    pub omega: f64,
}

impl PlaneWaveMode {
    pub fn new(amplitude: Vec3, wavevector: Vec3, phase: f64, c: f64) -> Result<Self> {
        let kn = wavevector.norm();
        if !(kn > 0.0 && kn.is_finite()) {
            return Err(Error::Field("wavevector must be non-zero".into()));
        }
        if amplitude.dot(&wavevector).abs() > 1e-12 * amplitude.norm() * kn {
            return Err(Error::Field("amplitude must be transverse to the wavevector".into()));
        }
        Ok(Self {
            amplitude,
            wavevector,
            phase,
            omega: c * kn,
        })
    }

    /// Mode with coordinate electric-field amplitude `e0` (vector) instead of `A` amplitude.
    pub fn from_electric_amplitude(e0: Vec3, wavevector: Vec3, phase: f64, c: f64) -> Result<Self> {
        let omega = c * wavevector.norm();
        Self::new(e0 / omega, wavevector, phase, c)
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.wavevector.norm()
    }

    fn arg(&self, x: &Vec3, t: f64) -> f64 {
        self.wavevector.dot(x) - self.omega * t + self.phase
    }
}

/// Cubic periodic box for midpoint-rule field integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicBox {
    pub origin: Vec3,
    pub length: f64,
    pub points_per_axis: usize,
}

impl PeriodicBox {
    pub fn spacing(&self) -> f64 {
        self.length / self.points_per_axis as f64
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    fn cell_centres(&self) -> impl Iterator<Item = Vec3> + '_ {
        let n = self.points_per_axis;
        let h = self.spacing();
        (0..n * n * n).map(move |idx| {
            let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
            self.origin + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * h
        })
    }
}

/// External field: plane-wave modes plus an optional quadrature box.
///
/// Field integrals (energy, field Lagrangian) are only accumulated when a box
/// is configured; pointwise accessors work without one.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldConfiguration {
    pub modes: Vec<PlaneWaveMode>,
    pub quadrature: Option<PeriodicBox>,
}

impl FieldConfiguration {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(modes: Vec<PlaneWaveMode>, quadrature: Option<PeriodicBox>, units: &UnitSystem) -> Result<Self> {
        for m in &modes {
            let expected = units.c * m.wavevector.norm();
            if (m.omega - expected).abs() > 1e-12 * expected {
                return Err(Error::Field(format!(
                    "mode frequency {} violates w = c|k| = {expected}",
                    m.omega
                )));
            }
        }
        if let Some(b) = &quadrature {
            if !(b.length > 0.0 && b.points_per_axis > 0) {
                return Err(Error::Field("quadrature box must have positive size".into()));
            }
        }
        Ok(Self { modes, quadrature })
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn vector_potential(&self, x: &Vec3, t: f64) -> Vec3 {
        self.modes.iter().map(|m| m.amplitude * m.arg(x, t).cos()).sum()
    }

    pub fn dt_vector_potential(&self, x: &Vec3, t: f64) -> Vec3 {
        self.modes.iter().map(|m| m.amplitude * (m.omega * m.arg(x, t).sin())).sum()
    }

    /// `E_coord = -dA/dt`.
    pub fn e_coord(&self, x: &Vec3, t: f64) -> Vec3 {
        -self.dt_vector_potential(x, t)
    }

    /// `B_coord = curl A`.
    pub fn b_coord(&self, x: &Vec3, t: f64) -> Vec3 {
        self.modes
            .iter()
            .map(|m| -m.wavevector.cross(&m.amplitude) * m.arg(x, t).sin())
            .sum()
    }

    fn resolved_box(&self) -> Result<Option<&PeriodicBox>> {
        let Some(b) = &self.quadrature else {
            return Ok(None);
        };
        for m in &self.modes {
            if b.spacing() > m.wavelength() / 16.0 {
                return Err(Error::Field(format!(
                    "quadrature under-resolved: spacing {} exceeds wavelength/16 = {}",
                    b.spacing(),
                    m.wavelength() / 16.0
                )));
            }
        }
        Ok(Some(b))
    }
}

/// `Pi = eps0 (1 - (gamma+1) phi/c^2) dA/dt`.
pub fn canonical_field_momentum(fields: &FieldConfiguration, x: &Vec3, t: f64, ctx: &PpnContext) -> Vec3 {
    let factor = 1.0 - (ctx.gamma + 1.0) * ctx.phi_over_c2();
    fields.dt_vector_potential(x, t) * (ctx.units.epsilon0 * factor)
}

/// External field energy in coordinate or tetrad form.
///
/// Coordinate: `(eps0/2) Int (1 + (gamma+1) phi/c^2) [(Pi/eps0)^2 + c^2 (curl A)^2]`.
/// Tetrad: `(eps0/2) Int sqrt(-g) [E_phys^2 + c^2 B_phys^2]`.
pub fn field_energy(fields: &FieldConfiguration, t: f64, ctx: &PpnContext, frame: Frame) -> Result<f64> {
    if fields.is_empty() {
        return Ok(0.0);
    }
    let b = fields
        .resolved_box()?
        .ok_or_else(|| Error::Field("field energy needs a quadrature box".into()))?;
    let eps0 = ctx.units.epsilon0;
    let c2 = ctx.c2();
    let dv = b.spacing().powi(3);
    // Both forms weight the two flat integrals by constants, so the sums are
    // taken once and the gravitational factors applied afterwards.
    let (mut e2, mut b2) = (0.0, 0.0);
    for x in b.cell_centres() {
        e2 += fields.dt_vector_potential(&x, t).norm_squared();
        b2 += fields.b_coord(&x, t).norm_squared();
    }
    let (e2, b2) = (e2 * dv, c2 * b2 * dv);
    let sum = match frame {
        Frame::Coordinate => {
            let pi_factor = 1.0 - (ctx.gamma + 1.0) * ctx.phi_over_c2();
            ctx.em_prefactor() * (pi_factor * pi_factor * e2 + b2)
        }
        Frame::Tetrad => {
            let sqrt_g = metric_components(ctx)?.sqrt_minus_g;
            // Component scale factors from coordinate to tetrad fields.
            let (ef, bf) = to_physical_fields(ctx, &Vec3::x(), &Vec3::x());
            sqrt_g * (ef.x * ef.x * e2 + bf.x * bf.x * b2)
        }
    };
    Ok(0.5 * eps0 * sum)
}

/// `(eps0/2) Int [(1 - (gamma+1)phi/c^2)(dA/dt)^2 - c^2 (1 + (gamma+1)phi/c^2)(curl A)^2]`.
pub fn external_field_lagrangian(fields: &FieldConfiguration, t: f64, ctx: &PpnContext) -> Result<f64> {
    let Some(b) = fields.resolved_box()? else {
        return Ok(0.0);
    };
    if fields.is_empty() {
        return Ok(0.0);
    }
    let kx = (ctx.gamma + 1.0) * ctx.phi_over_c2();
    let c2 = ctx.c2();
    let dv = b.spacing().powi(3);
    let sum: f64 = b
        .cell_centres()
        .map(|x| {
            (1.0 - kx) * fields.dt_vector_potential(&x, t).norm_squared()
                - c2 * (1.0 + kx) * fields.b_coord(&x, t).norm_squared()
        })
        .sum();
    Ok(0.5 * ctx.units.epsilon0 * sum * dv)
}

/// Named pieces of the post-Newtonian electromagnetic Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmLagrangianTerms {
    /// `-(1 + (gamma+1) phi/c^2) e1 e2 / (4 pi eps0 r)`.
    pub coulomb: f64,
    /// Velocity-dependent Darwin terms; no gravitational prefactor.
    pub darwin_velocity: f64,
    /// `sum_i e_i v_i . A(r_i)`.
    pub external_coupling: f64,
    pub external_field: f64,
}

impl EmLagrangianTerms {
    pub fn total(&self) -> f64 {
        self.coulomb + self.darwin_velocity + self.external_coupling + self.external_field
    }
}

pub fn em_lagrangian_terms(
    state: &TwoParticleState,
    fields: &FieldConfiguration,
    t: f64,
    ctx: &PpnContext,
) -> Result<EmLagrangianTerms> {
    let (v1, v2) = state.velocities()?;
    let rel = state.separation()?;
    let r = rel.norm();
    let ctx = &ctx.at_point(&state.centre_of_mass())?;
    let k = ctx.units.coulomb_constant();
    let e12 = state.e1 * state.e2;
    let coulomb = -ctx.em_prefactor() * e12 * k / r;
    let darwin_velocity = e12 * k / (2.0 * ctx.c2()) * (v1.dot(&v2) / r + v1.dot(&rel) * v2.dot(&rel) / r.powi(3));
    let external_coupling = state.e1 * v1.dot(&fields.vector_potential(&state.r1, t))
        + state.e2 * v2.dot(&fields.vector_potential(&state.r2, t));
    Ok(EmLagrangianTerms {
        coulomb,
        darwin_velocity,
        external_coupling,
        external_field: external_field_lagrangian(fields, t, ctx)?,
    })
}
