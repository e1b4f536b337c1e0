//! Seed handling.
//!
//! All randomness is ChaCha20 (`rand_chacha::ChaCha20Rng`). A dataset
//! seeded with `s` gives row `i` its own stream: the generator is keyed by
//! `seed_from_u64(s)` and positioned with `set_stream(i)`. Child seeds for
//! pools, replicates and per-model runs are derived with [`derive`], a
//! SplitMix64 fold over the parent seed and a list of tags.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type Seed = u64;

/// Tags that keep derived seed families apart.
pub mod tag {
    pub const POOL: u64 = 0x706f_6f6c;
    pub const OBSERVED: u64 = 0x6f62_7376;
    pub const REPLICATE: u64 = 0x7265_706c;
    pub const MODEL: u64 = 0x6d6f_646c;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `tags` into `seed` one at a time.
pub fn derive(seed: Seed, tags: &[u64]) -> Seed {
    tags.iter()
        .fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// The generator for stream `stream` of `seed`.
pub fn stream(seed: Seed, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draw in `[0, 1)` with 53 random bits.
pub fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..len` by 128-bit multiply-shift.
pub fn index(rng: &mut impl RngCore, len: usize) -> usize {
    ((rng.next_u64() as u128 * len as u128) >> 64) as usize
}

/// Inverse-CDF categorical draw over `probs` in state order.
pub fn categorical(rng: &mut impl RngCore, probs: &[f64]) -> usize {
    let u = unit(rng);
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave the cumulative sum a hair under 1.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_of_each_other() {
        let a: Vec<u64> = (0..4).map(|_| stream(7, 0).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(stream(7, 0).next_u64(), stream(7, 1).next_u64());
        assert_ne!(stream(7, 0).next_u64(), stream(8, 0).next_u64());
    }

    #[test]
    fn derive_separates_tags() {
        assert_ne!(derive(1, &[tag::POOL]), derive(1, &[tag::OBSERVED]));
        assert_ne!(derive(1, &[2, 3]), derive(1, &[3, 2]));
        assert_eq!(derive(5, &[1, 2]), derive(5, &[1, 2]));
    }

    #[test]
    fn categorical_respects_zero_mass() {
        let mut rng = stream(3, 0);
        for _ in 0..1000 {
            assert_eq!(categorical(&mut rng, &[0.0, 1.0, 0.0]), 1);
        }
    }

    #[test]
    fn index_stays_in_range() {
        let mut rng = stream(3, 0);
        assert!((0..1000).all(|_| index(&mut rng, 3) < 3));
    }
}
