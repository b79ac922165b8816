//! Seed fan-out.
//!
//! A run is driven by one 64-bit seed. Each consumer draws from its own
//! stream, derived as `splitmix64(seed ^ fnv1a64(stream_name))`, so adding a
//! new consumer never shifts the numbers seen by an existing one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DYNAMICS_INITIAL: &str = "dynamics.initial";
pub const RESONANCE_SURROGATES: &str = "roulette.surrogates";

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(stream.as_bytes()))
}

pub fn stream_rng(seed: u64, stream: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}
