//! Centre-of-mass motion of a composite particle whose mass includes its
//! internal energy, in a linear potential profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PpnContext;
use crate::hamiltonian::h_point;
use crate::Vec3;

/// `M + E_internal / c^2`.
pub fn composite_mass(total_mass: f64, internal_energy: f64, ctx: &PpnContext) -> f64 {
    total_mass + internal_energy / ctx.c2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub position: Vec3,
    pub momentum: Vec3,
}

/// `dH/dP` of the expanded point Hamiltonian.
pub fn point_velocity(point: &PhasePoint, m: f64, ctx: &PpnContext) -> Vec3 {
    let c2 = ctx.c2();
    let phi = ctx.phi_at(&point.position);
    let p = point.momentum;
    let p2 = p.norm_squared();
    p * (1.0 / m - p2 / (2.0 * m.powi(3) * c2) + (2.0 * ctx.gamma + 1.0) * phi / (m * c2))
}

/// `-dH/dR` of the expanded point Hamiltonian for a linear potential.
pub fn point_force(point: &PhasePoint, m: f64, ctx: &PpnContext) -> Vec3 {
    let c2 = ctx.c2();
    let phi = ctx.phi_at(&point.position);
    let p2 = point.momentum.norm_squared();
    -ctx.grad_phi * (m + (2.0 * ctx.gamma + 1.0) * p2 / (2.0 * m * c2) + (2.0 * ctx.beta - 1.0) * m * phi / c2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub steps: usize,
    /// Fixed-point tolerance of each implicit step, relative to the state scale.
    pub tolerance: f64,
}

impl IntegratorSettings {
    pub fn new(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || steps == 0 {
            return Err(Error::InvalidParameter(format!("need dt > 0 and steps > 0, got {dt}, {steps}")));
        }
        Ok(Self {
            dt,
            steps,
            tolerance: 1e-15,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub position: Vec3,
    pub momentum: Vec3,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub mass: f64,
    pub samples: Vec<TrajectorySample>,
    /// Largest `|H(t) - H(0)| / max(|H(0)|, scale)` along the run.
    pub max_energy_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }
}

/// Implicit-midpoint integration of Hamilton's equations of the expanded
/// point Hamiltonian with mass `m`.
pub fn integrate(start: &PhasePoint, m: f64, ctx: &PpnContext, settings: &IntegratorSettings) -> Result<Trajectory> {
    let energy = |z: &PhasePoint| h_point(&z.momentum, &z.position, m, ctx);
    let mut z = *start;
    let e0 = energy(&z)?;
    let mut samples = vec![TrajectorySample {
        t: 0.0,
        position: z.position,
        momentum: z.momentum,
        energy: e0,
    }];
    let scale_e = e0.abs().max(m * ctx.phi.abs()).max(f64::MIN_POSITIVE);
    let mut drift: f64 = 0.0;
    let dt = settings.dt;
    for step in 1..=settings.steps {
        let mut next = z;
        let mut converged = false;
        for _ in 0..100 {
            let mid = PhasePoint {
                position: (z.position + next.position) * 0.5,
                momentum: (z.momentum + next.momentum) * 0.5,
            };
            let candidate = PhasePoint {
                position: z.position + point_velocity(&mid, m, ctx) * dt,
                momentum: z.momentum + point_force(&mid, m, ctx) * dt,
            };
            let scale_r = z.position.norm().max(candidate.position.norm()).max(f64::MIN_POSITIVE);
            let scale_p = z.momentum.norm().max(candidate.momentum.norm()).max(m * ctx.grad_phi.norm() * dt);
            let change = ((candidate.position - next.position).norm() / scale_r)
                .max((candidate.momentum - next.momentum).norm() / scale_p.max(f64::MIN_POSITIVE));
            next = candidate;
            if change <= settings.tolerance {
                converged = true;
                break;
            }
        }
        if !converged {
            // Rounding can keep the last bits oscillating; one more pass settles it.
            let mid = PhasePoint {
                position: (z.position + next.position) * 0.5,
                momentum: (z.momentum + next.momentum) * 0.5,
            };
            let again = PhasePoint {
                position: z.position + point_velocity(&mid, m, ctx) * dt,
                momentum: z.momentum + point_force(&mid, m, ctx) * dt,
            };
            let scale = next.position.norm().max(1.0);
            if (again.position - next.position).norm() > 1e3 * settings.tolerance * scale {
                return Err(Error::NoConvergence {
                    what: "implicit midpoint step",
                    iterations: 100,
                    residual: (again.position - next.position).norm() / scale,
                });
            }
            next = again;
        }
        z = next;
        let e = energy(&z)?;
        drift = drift.max((e - e0).abs() / scale_e);
        samples.push(TrajectorySample {
            t: step as f64 * dt,
            position: z.position,
            momentum: z.momentum,
            energy: e,
        });
    }
    Ok(Trajectory {
        mass: m,
        samples,
        max_energy_drift: drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::UnitSystem;

    #[test]
    fn uniform_potential_at_rest_stays_put() {
        let ctx = PpnContext::from_ratio(UnitSystem::atomic(), 1.0, 1.0, -1e-5).unwrap();
        let start = PhasePoint {
            position: Vec3::new(1.0, 2.0, 3.0),
            momentum: Vec3::zeros(),
        };
        let tr = integrate(&start, 10.0, &ctx, &IntegratorSettings::new(0.1, 100).unwrap()).unwrap();
        assert_eq!(tr.last().position, start.position);
    }

    #[test]
    fn newtonian_fall_is_parabolic() {
        let units = UnitSystem::atomic().with_c(1e8).unwrap();
        let g = Vec3::new(0.0, 0.0, 1e-3);
        let ctx = PpnContext::new(units, 1.0, 1.0, 0.0).unwrap().with_gradient(g, Vec3::zeros()).unwrap();
        let m = 3.0;
        let start = PhasePoint {
            position: Vec3::new(0.0, 0.0, 10.0),
            momentum: Vec3::new(0.3, 0.0, 0.6),
        };
        let settings = IntegratorSettings::new(0.05, 2000).unwrap();
        let tr = integrate(&start, m, &ctx, &settings).unwrap();
        for s in tr.samples.iter().step_by(97) {
            let exact = start.position + start.momentum * (s.t / m) - g * (0.5 * s.t * s.t);
            assert!((s.position - exact).norm() <= 1e-6 * exact.norm(), "t={} {:?}", s.t, s.position - exact);
        }
        assert!(tr.max_energy_drift < 1e-10);
    }
}
