//! Deterministic low-discrepancy phase-point sampling.

use pn_atom::spectrum::AtomParameters;
use pn_atom::{TwoParticleState, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Dimensions used per two-particle phase point.
pub const PHASE_DIM: usize = 12;

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f *= inv;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Halton sequence with a seeded Cranley-Patterson rotation.
#[derive(Debug, Clone)]
pub struct PhaseSampler {
    rotation: Vec<f64>,
}

impl PhaseSampler {
    /// Panics if `dim` exceeds 16.
    pub fn new(seed: u64, dim: usize) -> Self {
        assert!(dim <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            rotation: (0..dim).map(|_| rng.gen::<f64>()).collect(),
        }
    }

    /// Point `i` in `[0, 1)^dim`.
    pub fn unit(&self, i: u64) -> Vec<f64> {
        self.rotation
            .iter()
            .zip(PRIMES)
            .map(|(s, b)| (radical_inverse(i + 1, b) + s).fract())
            .collect()
    }

    /// Point `i` in `[-1, 1)^dim`.
    pub fn symmetric(&self, i: u64) -> Vec<f64> {
        self.unit(i).into_iter().map(|u| 2.0 * u - 1.0).collect()
    }

    /// Lab state with momenta `m_k v` for velocities of size `velocity` and
    /// positions within `extent`, separated by at least `0.3 extent`.
    pub fn lab_state(&self, i: u64, atom: &AtomParameters, velocity: f64, extent: f64) -> TwoParticleState {
        let h = self.symmetric(i);
        let v3 = |s: &[f64]| Vec3::new(s[0], s[1], s[2]);
        let r1 = v3(&h[0..3]) * extent;
        let mut r2 = v3(&h[3..6]) * extent;
        if (r1 - r2).norm() < 0.3 * extent {
            r2 += Vec3::new(0.5, -0.2, 0.3) * extent;
        }
        TwoParticleState::with_momenta(
            atom.m1,
            atom.m2,
            atom.e2,
            r1,
            r2,
            v3(&h[6..9]) * (velocity * atom.m1),
            v3(&h[9..12]) * (velocity * atom.m2),
        )
        .with_charges(atom.e1, atom.e2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_points() {
        let a = PhaseSampler::new(7, 4);
        let b = PhaseSampler::new(7, 4);
        let c = PhaseSampler::new(8, 4);
        assert_eq!(a.unit(3), b.unit(3));
        assert_ne!(a.unit(3), c.unit(3));
        assert!(a.unit(100).iter().all(|u| (0.0..1.0).contains(u)));
    }

    #[test]
    fn sampled_states_are_separated() {
        let s = PhaseSampler::new(1, PHASE_DIM);
        let atom = AtomParameters::hydrogen_like(1.0, 2.0, 1.0);
        for i in 0..200 {
            let st = s.lab_state(i, &atom, 1.0, 1.0);
            assert!(st.separation().unwrap().norm() >= 0.3 - 1e-12);
            assert_eq!((st.e1, st.e2), (-1.0, 1.0));
        }
    }
}
