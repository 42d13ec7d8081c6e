//! Seeded random streams.
//!
//! Every random quantity in a run (testing sets, tau samples, Monte Carlo
//! repetitions, frozen noise) comes from a ChaCha stream whose seed is derived
//! from one master seed and a stream label, so a run is a pure function of its
//! configuration.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed from a master seed and a sequence of labels.
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(mix64(master), |acc, &l| mix64(acc ^ mix64(l)))
}

pub fn stream(master: u64, labels: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, labels))
}

/// Stream labels used across the crate.
pub mod label {
    pub const TESTING_SET: u64 = 1;
    pub const TAU: u64 = 2;
    pub const MONTE_CARLO: u64 = 3;
    pub const NOISE: u64 = 4;
    pub const ERROR_POINTS: u64 = 5;
}

/// `count` points uniform in the unit hypercube `[0, 1]^dim`.
pub fn unit_points(rng: &mut impl Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

/// Standard normal draw by the Box-Muller transform.
pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}
