#![allow(dead_code)]

use pn_atom::em::{FieldConfiguration, PeriodicBox, PlaneWaveMode};
use pn_atom::{TwoParticleState, UnitSystem, Vec3};

/// Radical inverse in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let inv = 1.0 / b as f64;
    while i > 0 {
        f *= inv;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Point `i` of the Halton sequence in `dim <= 16` dimensions, mapped to `[-1, 1)`.
pub fn halton_symmetric(i: u64, dim: usize) -> Vec<f64> {
    PRIMES[..dim].iter().map(|&b| 2.0 * radical_inverse(i + 1, b) - 1.0).collect()
}

pub fn v3(s: &[f64]) -> Vec3 {
    Vec3::new(s[0], s[1], s[2])
}

/// Lab state with momenta: masses `m1 = 1`, `m2` in `[1, 5]`, separations of order one.
pub fn sampled_momentum_state(i: u64, momentum_scale: f64) -> TwoParticleState {
    let h = halton_symmetric(i, 13);
    let m2 = 3.0 + 2.0 * h[0];
    let r1 = v3(&h[1..4]) * 0.7;
    let mut r2 = v3(&h[4..7]) * 0.7;
    if (r1 - r2).norm() < 0.3 {
        r2 += Vec3::new(0.5, -0.2, 0.3);
    }
    TwoParticleState::with_momenta(
        1.0,
        m2,
        1.0,
        r1,
        r2,
        v3(&h[7..10]) * momentum_scale,
        v3(&h[10..13]) * momentum_scale * m2,
    )
}

/// Same sampling with velocities of magnitude `velocity_scale`.
pub fn sampled_velocity_state(i: u64, velocity_scale: f64) -> TwoParticleState {
    let s = sampled_momentum_state(i, 1.0);
    let (p1, p2) = s.momenta().unwrap();
    s.with_kinematics(pn_atom::Kinematics::Velocities {
        v1: p1 * velocity_scale,
        v2: p2 / s.m2 * velocity_scale,
    })
}

/// One transverse plane wave along a box diagonal, resolved by the box.
pub fn plane_wave(units: &UnitSystem, amplitude: f64, with_box: bool) -> FieldConfiguration {
    let length = 40.0;
    let k = Vec3::new(1.0, 1.0, 0.0) * (2.0 * std::f64::consts::PI / length);
    let a = Vec3::new(1.0, -1.0, 0.5).normalize() * amplitude;
    let a = a - k * (a.dot(&k) / k.norm_squared());
    let mode = PlaneWaveMode::new(a, k, 0.3, units.c).unwrap();
    let quadrature = with_box.then_some(PeriodicBox {
        origin: Vec3::new(-20.0, -20.0, -20.0),
        length,
        points_per_axis: 24,
    });
    FieldConfiguration::new(vec![mode], quadrature, units).unwrap()
}

/// `|a - b| <= tol * scale`.
pub fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale.abs().max(f64::MIN_POSITIVE)
}
