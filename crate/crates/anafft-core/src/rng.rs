//! Counter-based random numbers.
//!
//! Every stochastic quantity is a pure function of a key built from the model
//! seed and the logical position of the draw (array id and cell for
//! programming noise, stream path and MVM/column index for read noise).
//! Execution order therefore never changes results.

use crate::math;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
pub fn hash2(a: u64, b: u64) -> u64 {
    mix64(mix64(a) ^ b.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c908, |h, &w| hash2(h, w))
}

/// Uniform in the open interval (0, 1).
#[inline]
pub fn uniform(key: u64) -> f64 {
    ((key >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal deviate for `key` (Box-Muller on two derived uniforms).
#[inline]
pub fn gaussian(key: u64) -> f64 {
    let u1 = uniform(hash2(key, 1));
    let u2 = uniform(hash2(key, 2));
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

/// Two independent standard normal deviates for `key`; the first equals
/// `gaussian(key)`.
#[inline]
pub fn gaussian_pair(key: u64) -> (f64, f64) {
    let u1 = uniform(hash2(key, 1));
    let u2 = uniform(hash2(key, 2));
    let r = math::sqrt(-2.0 * math::ln(u1));
    let (s, c) = math::sin_cos(2.0 * core::f64::consts::PI * u2);
    (r * c, r * s)
}

/// Hierarchical key for read-noise streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey(pub u64);

impl StreamKey {
    pub fn root(seed: u64, stream: u64) -> Self {
        StreamKey(hash2(hash2(0x5eed, seed), stream))
    }

    #[inline]
    pub fn child(self, i: u64) -> Self {
        StreamKey(hash2(self.0, i))
    }
}
