//! Shared fixtures for the criterion benches.

use std::f64::consts::PI;

use cyllens_core::fields::{generate_divfree_random, generate_shear_heat, RandomOptions};
use cyllens_core::{Candidate, GridSpec, SpaceTimeField, SpaceTimePoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Half-space grid of `n³` nodes with spacing `1/n` and 8 time levels.
pub fn half_grid(n: usize) -> GridSpec {
    let h = 1.0 / n as f64;
    GridSpec::half_space([n, n, n], h, 0.0, 0.01, 8).expect("valid bench grid")
}

pub fn shear(n: usize) -> SpaceTimeField {
    generate_shear_heat(half_grid(n), 1.0, PI).expect("shear fixture")
}

pub fn random(n: usize, seed: u64) -> SpaceTimeField {
    generate_divfree_random(half_grid(n), seed, 8, &RandomOptions::default()).expect("random fixture")
}

/// Boundary centre at the last time level.
pub fn wall_center(field: &SpaceTimeField) -> SpaceTimePoint {
    SpaceTimePoint::new([0.0; 3], field.grid().t_end())
}

/// `n` candidates scattered in the unit box with radii in `[0.005, 0.05)`.
pub fn candidates(n: usize, seed: u64) -> Vec<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let z = SpaceTimePoint::new(x, rng.random::<f64>());
            Candidate::new(z, rng.random_range(0.005..0.05), 1.0)
        })
        .collect()
}
