//! Deterministic random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha stream identified by
//! `(master_seed, stream)`, so results never depend on which worker ran the
//! trial or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::C64;

pub type SimRng = ChaCha8Rng;

/// SplitMix64 finalizer, used to derive independent keys from tuples.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a key for a labelled sub-experiment (row, condition, ...).
pub fn derive_key(master_seed: u64, label: u64) -> u64 {
    mix64(master_seed ^ mix64(label))
}

/// RNG for trial `stream` of the experiment keyed by `key`.
pub fn substream(key: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = `variance`.
#[inline]
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = crate::math::sqrt(0.5 * variance);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(s * re, s * im)
}
