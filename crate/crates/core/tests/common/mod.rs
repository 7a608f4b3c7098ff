//! Helpers shared by the integration tests.
#![allow(dead_code)]

use dimseis::state::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn reg() -> RegularizationParams {
    RegularizationParams::default()
}

pub fn unit_material() -> MaterialSample {
    MaterialSample::new(2.0, 1.0, 1.0)
}

/// Material with O(1) Lamé constants and density.
pub fn random_material(r: &mut ChaCha8Rng) -> MaterialSample {
    MaterialSample::new(r.random_range(0.5..3.0), r.random_range(0.5..2.0), r.random_range(0.5..2.0))
}

/// State with unit-scale random stresses and α-weighted velocities.
pub fn random_state(r: &mut ChaCha8Rng, m: MaterialSample, alpha: f64) -> State13 {
    let mut q = State13::at_rest(m, alpha);
    for v in 0..NEVOLVED {
        q[v] = r.random_range(-1.0..1.0);
    }
    for v in AU..=AW {
        q[v] *= alpha;
    }
    q
}

/// Volume fraction of the diffuse profile, written out from its definition:
/// ξ ramps linearly from 0 at r = −(1 − η) I_D to 1 at r = (1 + η) I_D and
/// α = (1 − ξ)^p_d.
pub fn profile_alpha(r: f64, thickness: f64, eta: f64, pd: f64) -> f64 {
    if thickness == 0.0 {
        return if r <= 0.0 { 1.0 } else { 0.0 };
    }
    let xi = ((r + (1.0 - eta) * thickness) / (2.0 * thickness)).clamp(0.0, 1.0);
    (1.0 - xi).powf(pd)
}

/// Largest absolute entry of the evolved components over a flat state array.
pub fn max_evolved(u: &[f64]) -> f64 {
    u.chunks_exact(NVAR)
        .flat_map(|q| q[..NEVOLVED].iter())
        .fold(0.0f64, |a, v| a.max(v.abs()))
}
