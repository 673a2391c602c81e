//! Seedable randomness. Every randomized routine takes an explicit `u64`
//! seed; independent tasks (Monte-Carlo trials, parallel chunks) derive a
//! child seed per index so results never depend on scheduling.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Prng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Prng {
    Prng::seed_from_u64(seed)
}

/// splitmix64 step; decorrelates sequential indices well enough for
/// seeding independent ChaCha streams.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for trial/task `index` under `master`. Pure function: a
/// trial's stream is the same no matter which worker runs it.
pub fn child_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x51ed_270b)))
}

pub fn rng_for_trial(master: u64, index: u64) -> Prng {
    rng_from_seed(child_seed(master, index))
}

/// Uniform permutation of `0..n` (Fisher-Yates).
pub fn random_permutation(n: usize, rng: &mut Prng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Uniform k-subset of `0..n`, returned sorted.
pub fn random_subset(n: usize, k: usize, rng: &mut Prng) -> Vec<usize> {
    debug_assert!(k <= n);
    // partial Fisher-Yates: first k slots of a shuffle
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut out: Vec<usize> = pool[..k].to_vec();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn child_seeds_distinct() {
        let a = child_seed(7, 0);
        let b = child_seed(7, 1);
        let c = child_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn permutation_is_permutation() {
        let mut rng = rng_from_seed(3);
        let p = random_permutation(10, &mut rng);
        let mut q = p.clone();
        q.sort_unstable();
        assert_eq!(q, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn subset_size_and_range() {
        let mut rng = rng_from_seed(4);
        for _ in 0..50 {
            let s = random_subset(12, 5, &mut rng);
            assert_eq!(s.len(), 5);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&x| x < 12));
        }
    }
}
