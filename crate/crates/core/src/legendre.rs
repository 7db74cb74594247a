//! Numerical Legendre transform of a black-box Lagrangian.
//!
//! Momenta are central-difference gradients of the Lagrangian; the velocities
//! belonging to prescribed momenta are found by damped Newton iteration on the
//! finite-difference Hessian.

use nalgebra::{DMatrix, DVector};

use crate::em::FieldConfiguration;
use crate::error::{Error, Result};
use crate::geometry::PpnContext;
use crate::lagrangian::{total_lagrangian, Kinematics, TwoParticleState};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreOptions {
    pub max_iterations: usize,
    /// Relative tolerance on `|dL/dv - p|`.
    pub tolerance: f64,
    /// Lower bound on the velocity scale used for difference steps.
    pub velocity_floor: f64,
}

impl LegendreOptions {
    /// Defaults with the step floor `c * 1e-6`.
    pub fn for_light_speed(c: f64) -> Self {
        Self {
            max_iterations: 50,
            tolerance: 1e-12,
            velocity_floor: c * 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreSolution {
    pub hamiltonian: f64,
    pub velocities: DVector<f64>,
    pub iterations: usize,
}

struct Differencer<'f, L> {
    lagrangian: &'f L,
    floor: f64,
}

impl<L> Differencer<'_, L>
where
    L: Fn(&DVector<f64>) -> Result<f64>,
{
    fn scale(&self, v: &DVector<f64>) -> f64 {
        v.norm().max(self.floor)
    }

    fn gradient(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let h = f64::EPSILON.cbrt() * self.scale(v);
        let mut g = DVector::zeros(v.len());
        let mut probe = v.clone();
        for j in 0..v.len() {
            probe[j] = v[j] + h;
            let fp = (self.lagrangian)(&probe)?;
            probe[j] = v[j] - h;
            let fm = (self.lagrangian)(&probe)?;
            probe[j] = v[j];
            g[j] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }

    fn hessian(&self, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = v.len();
        let h = f64::EPSILON.powf(0.25) * self.scale(v);
        let f0 = (self.lagrangian)(v)?;
        let mut m = DMatrix::zeros(n, n);
        let mut probe = v.clone();
        for j in 0..n {
            probe[j] = v[j] + h;
            let fp = (self.lagrangian)(&probe)?;
            probe[j] = v[j] - h;
            let fm = (self.lagrangian)(&probe)?;
            probe[j] = v[j];
            m[(j, j)] = (fp - 2.0 * f0 + fm) / (h * h);
            for k in 0..j {
                let mut at = |sj: f64, sk: f64| {
                    probe[j] = v[j] + sj * h;
                    probe[k] = v[k] + sk * h;
                    let f = (self.lagrangian)(&probe);
                    probe[j] = v[j];
                    probe[k] = v[k];
                    f
                };
                let value = (at(1.0, 1.0)? - at(1.0, -1.0)? - at(-1.0, 1.0)? + at(-1.0, -1.0)?) / (4.0 * h * h);
                m[(j, k)] = value;
                m[(k, j)] = value;
            }
        }
        Ok(m)
    }
}

/// `sum p.v - L` at the velocities where `dL/dv = p`.
///
/// The Lagrangian must be convex in the velocities near the solution; a
/// Hessian that fails Cholesky factorisation is reported as non-convex.
pub fn numerical_legendre<L>(
    lagrangian: &L,
    momenta: &DVector<f64>,
    initial_velocity: &DVector<f64>,
    options: &LegendreOptions,
) -> Result<LegendreSolution>
where
    L: Fn(&DVector<f64>) -> Result<f64>,
{
    if momenta.len() != initial_velocity.len() {
        return Err(Error::InvalidParameter("momentum and velocity dimensions differ".into()));
    }
    let diff = Differencer {
        lagrangian,
        floor: options.velocity_floor,
    };
    let target = momenta.norm().max(f64::MIN_POSITIVE);
    let mut v = initial_velocity.clone();
    let mut residual = diff.gradient(&v)? - momenta;
    for iteration in 0..options.max_iterations {
        let rn = residual.norm();
        if rn <= options.tolerance * target {
            return finish(lagrangian, momenta, v, iteration);
        }
        let hess = diff.hessian(&v)?;
        let chol = hess.cholesky().ok_or(Error::NonConvex)?;
        let step = chol.solve(&residual);
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = &v - &step * damping;
            let r = diff.gradient(&trial)? - momenta;
            if r.norm() < rn {
                accepted = Some((trial, r));
                break;
            }
            damping *= 0.5;
        }
        match accepted {
            Some((trial, r)) => {
                v = trial;
                residual = r;
            }
            None => {
                // No further decrease: accept if the residual sits at the
                // difference-noise level of the gradient.
                if rn <= noise_floor(lagrangian, &v, &diff)? {
                    return finish(lagrangian, momenta, v, iteration);
                }
                return Err(Error::NoConvergence {
                    what: "legendre newton",
                    iterations: iteration,
                    residual: rn / target,
                });
            }
        }
    }
    let rn = residual.norm();
    if rn <= options.tolerance * target || rn <= noise_floor(lagrangian, &v, &diff)? {
        return finish(lagrangian, momenta, v, options.max_iterations);
    }
    Err(Error::NoConvergence {
        what: "legendre newton",
        iterations: options.max_iterations,
        residual: rn / target,
    })
}

fn noise_floor<L>(lagrangian: &L, v: &DVector<f64>, diff: &Differencer<'_, L>) -> Result<f64>
where
    L: Fn(&DVector<f64>) -> Result<f64>,
{
    let h = f64::EPSILON.cbrt() * diff.scale(v);
    let f = lagrangian(v)?.abs();
    Ok(1e3 * f64::EPSILON * f.max(f64::MIN_POSITIVE) / h * (v.len() as f64).sqrt())
}

fn finish<L>(lagrangian: &L, momenta: &DVector<f64>, v: DVector<f64>, iterations: usize) -> Result<LegendreSolution>
where
    L: Fn(&DVector<f64>) -> Result<f64>,
{
    let hamiltonian = momenta.dot(&v) - lagrangian(&v)?;
    Ok(LegendreSolution {
        hamiltonian,
        velocities: v,
        iterations,
    })
}

/// Numerical Hamiltonian of [`total_lagrangian`] at a momentum-representation state.
///
/// Rest energies and the external field integral do not depend on the
/// particle velocities; both are dropped so the result compares directly with
/// the particle part of the closed-form lab Hamiltonian.
pub fn two_particle_legendre(
    state: &TwoParticleState,
    ctx: &PpnContext,
    fields: &FieldConfiguration,
    t: f64,
) -> Result<LegendreSolution> {
    let (p1, p2) = state.momenta()?;
    let pointwise = FieldConfiguration {
        modes: fields.modes.clone(),
        quadrature: None,
    };
    let base = *state;
    let lagrangian = |v: &DVector<f64>| -> Result<f64> {
        let s = base.with_kinematics(Kinematics::Velocities {
            v1: Vec3::new(v[0], v[1], v[2]),
            v2: Vec3::new(v[3], v[4], v[5]),
        });
        let b = total_lagrangian(&s, ctx, &pointwise, t)?;
        Ok(b.total_without_rest())
    };
    let a1 = fields.vector_potential(&state.r1, t);
    let a2 = fields.vector_potential(&state.r2, t);
    let guess1 = (p1 - a1 * state.e1) / state.m1;
    let guess2 = (p2 - a2 * state.e2) / state.m2;
    let momenta = DVector::from_column_slice(&[p1.x, p1.y, p1.z, p2.x, p2.y, p2.z]);
    let initial = DVector::from_column_slice(&[guess1.x, guess1.y, guess1.z, guess2.x, guess2.y, guess2.z]);
    numerical_legendre(&lagrangian, &momenta, &initial, &LegendreOptions::for_light_speed(ctx.c()))
}
