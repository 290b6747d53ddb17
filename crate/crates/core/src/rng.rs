//! Seeded random streams.
//!
//! Every stochastic routine takes its stream explicitly. Streams for
//! independent work items are derived from a master seed with [`derive_seed`]
//! so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

pub type Stream = ChaCha8Rng;

pub fn seeded(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a tuple of indices into a child seed.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Standard normal draw by inverse-CDF of an open-interval uniform.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 53-bit uniform in (0, 1)
    let bits = rng.next_u64() >> 11;
    let u = (bits as f64 + 0.5) / (1u64 << 53) as f64;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    unit.inverse_cdf(u)
}
