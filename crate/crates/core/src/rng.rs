//! Counter-based random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha8 stream. The key comes
//! from the user seed; the 64-bit stream id is a mix of (experiment, trial).
//! Results therefore never depend on how trials are scheduled onto workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Experiment tags. Each consumer of randomness gets a distinct one so that
/// streams never collide across experiments sharing a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Matrix = 1,
    Smoothing = 2,
    Potential = 3,
    SminTail = 4,
    SmallBall = 5,
    Convergence = 6,
    CharFactorization = 7,
    DiscSample = 8,
    Custom = 255,
}

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stream for trial `trial` of `experiment` under `seed`.
pub fn stream(seed: u64, experiment: Experiment, trial: u64) -> ChaCha8Rng {
    stream_raw(seed, experiment as u64, trial)
}

/// Same as [`stream`] with an arbitrary numeric experiment tag.
pub fn stream_raw(seed: u64, experiment: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(splitmix64(splitmix64(experiment) ^ trial));
    rng
}

/// Derive a child seed, e.g. for a sub-experiment inside a sweep cell.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
