//! Indexed random streams.
//!
//! Every trajectory of an ensemble draws from its own ChaCha8 stream keyed by
//! `(seed, index)`. The keystream is a pure function of key, stream id and
//! block counter, so draws do not depend on platform or on which thread
//! runs the trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Stream = ChaCha8Rng;

pub fn seed_stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
pub fn normal(rng: &mut Stream) -> f64 {
    rng.sample(StandardNormal)
}

pub fn fill_normal(rng: &mut Stream, out: &mut [f64]) {
    for o in out {
        *o = rng.sample(StandardNormal);
    }
}

/// Sub-seed for a named purpose, so independent parts of one experiment
/// (burn-in run, ensemble, reference run) never share a stream.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut rng = seed_stream(seed, salt ^ 0x9e37_79b9_7f4a_7c15);
    rng.random()
}
