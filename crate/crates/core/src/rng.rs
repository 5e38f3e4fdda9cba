//! Reproducible random streams.
//!
//! Every random decision in a session draws from a Xoshiro256** generator
//! whose 256-bit state is filled by SplitMix64 from a single 64-bit stream
//! seed. Stream seeds are derived from the session seed by folding a
//! domain tag and a list of indices through the SplitMix64 finalizer:
//!
//! ```text
//! h = mix(seed ^ domain)
//! for i in indices: h = mix(h ^ mix(i + GOLDEN_GAMMA))
//! ```
//!
//! where `mix(z)` is the SplitMix64 output function and
//! `GOLDEN_GAMMA = 0x9E3779B97F4A7C15`. Uniform doubles take the top 53 bits
//! of `next_u64`: `(x >> 11) * 2^-53`, which lies in `[0, 1)`.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Domain tags keep streams for different purposes independent.
pub mod domain {
    pub const TRANSITION: u64 = 0x7472_616e_7369_7431; // "transit1"
    pub const GENERATE: u64 = 0x6765_6e65_7261_7431; // "generat1"
    pub const STUB_NOISE: u64 = 0x7374_7562_6e6f_6931; // "stubnoi1"
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, domain: u64, indices: &[u64]) -> u64 {
    indices.iter().fold(mix(seed ^ domain), |h, &i| {
        mix(h ^ mix(i.wrapping_add(GOLDEN_GAMMA)))
    })
}

/// A single deterministic random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: Xoshiro256StarStar,
}

impl Stream {
    pub fn from_seed(stream_seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(stream_seed),
        }
    }

    pub fn derive(seed: u64, domain: u64, indices: &[u64]) -> Self {
        Self::from_seed(derive_seed(seed, domain, indices))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
