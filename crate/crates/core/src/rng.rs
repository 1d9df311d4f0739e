//! Deterministic per-trial random streams.
//!
//! Each trial of a randomized suite draws from its own ChaCha stream whose
//! seed mixes the user seed, the suite name and the trial index, so results
//! do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Independent stream for trial `trial` of suite `suite`.
pub fn trial_rng(seed: u64, suite: &str, trial: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(seed ^ fnv1a(suite)).wrapping_add(trial));
    ChaCha8Rng::seed_from_u64(key)
}

/// Uniform vector in the box `[lo, hi]^m`.
pub fn uniform_vec<R: Rng>(rng: &mut R, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Uniform vector in a per-coordinate box.
pub fn uniform_in_box<R: Rng>(rng: &mut R, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter().zip(hi).map(|(&a, &b)| rng.gen_range(a..b)).collect()
}
