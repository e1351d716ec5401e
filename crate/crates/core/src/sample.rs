//! Seeded sampling helpers. Every random choice in the crate goes through a
//! [`Rng`] built from a `u64` seed, so runs are reproducible.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Default seed when neither a flag nor `STREAMALG_SEED` supplies one.
pub const DEFAULT_SEED: u64 = 0x5eed_0f_a1_9e_b2a;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for a named sub-task.
pub fn derive(seed: u64, salt: u64) -> u64 {
    splitmix(seed ^ splitmix(salt.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

pub fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Salt derived from a label, for `derive`.
pub fn label(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x1000_0000_01b3))
}

/// Word length with a geometric distribution of mean 4, capped at 32.
pub fn word_len(rng: &mut Rng) -> usize {
    let mut n = 0;
    while n < 32 && rng.gen_bool(0.8) {
        n += 1;
    }
    n
}

pub fn small_int(rng: &mut Rng, lo: i64, hi: i64) -> i64 {
    rng.gen_range(lo..=hi)
}

pub fn coin(rng: &mut Rng, p: f64) -> bool {
    rng.gen_bool(p)
}

pub fn below(rng: &mut Rng, n: usize) -> usize {
    rng.gen_range(0..n)
}
