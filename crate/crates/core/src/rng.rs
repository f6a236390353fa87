//! Counter-based random numbers.
//!
//! Bond `k` of a realization with seed `s` is decided by the 64-bit word at
//! position `k` of the ChaCha8 keystream for `s`. Reading a contiguous range
//! sequentially and seeking to a single word give the same values, so edge
//! decisions do not depend on iteration order or on how work is chunked.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Words per ChaCha block; seeking costs one block computation.
const CHUNK: usize = 4096;

/// Maps a 64-bit word onto [0, 1) using its top 53 bits.
#[inline]
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform variate number `counter` of the stream keyed by `seed`.
pub fn uniform_at(seed: u64, counter: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // one u64 = two 32-bit words
    rng.set_word_pos(u128::from(counter) * 2);
    unit_f64(rng.next_u64())
}

/// Fills `out` with variates `start, start+1, …` of the stream keyed by `seed`.
pub fn fill_uniform(seed: u64, start: u64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(u128::from(start) * 2);
    for x in out.iter_mut() {
        *x = unit_f64(rng.next_u64());
    }
}

/// Bernoulli(p) decisions for counters `0..n`, chunked so the work can be
/// split without changing the result.
pub fn bernoulli_mask(seed: u64, n: usize, p: f64, exec: crate::Execution) -> Vec<bool> {
    let chunks = n.div_ceil(CHUNK);
    let parts = exec.map(chunks, |c| {
        let start = c * CHUNK;
        let len = CHUNK.min(n - start);
        let mut buf = vec![0.0; len];
        fill_uniform(seed, start as u64, &mut buf);
        buf.into_iter().map(|u| u < p).collect::<Vec<bool>>()
    });
    parts.concat()
}

/// Positional seed derivation: realization `index` of a run with `master`
/// seed. Adding realizations never perturbs earlier ones.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer over a mix of both words
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Execution;

    #[test]
    fn seek_matches_sequential_read() {
        let mut seq = vec![0.0; 100];
        fill_uniform(7, 0, &mut seq);
        for k in [0usize, 1, 17, 63, 99] {
            assert_eq!(uniform_at(7, k as u64), seq[k]);
        }
        let mut tail = vec![0.0; 10];
        fill_uniform(7, 90, &mut tail);
        assert_eq!(&tail[..], &seq[90..]);
    }

    #[test]
    fn mask_independent_of_execution() {
        let a = bernoulli_mask(3, 10_000, 0.4, Execution::Sequential);
        let b = bernoulli_mask(3, 10_000, 0.4, Execution::Parallel);
        assert_eq!(a, b);
        for (k, &open) in a.iter().enumerate().step_by(997) {
            assert_eq!(open, uniform_at(3, k as u64) < 0.4);
        }
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seeds: Vec<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 1000);
    }
}
