//! Seeded random streams.
//!
//! Every run owns independent ChaCha streams split from one seed: one drives
//! the feedback oracle, one the learner's own choices, and one the harness's
//! label shuffle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

const ORACLE_STREAM: u64 = 0;
const LEARNER_STREAM: u64 = 1;
const LABEL_STREAM: u64 = 2;

pub fn oracle_stream(seed: u64) -> RunRng {
    stream(seed, ORACLE_STREAM)
}

pub fn learner_stream(seed: u64) -> RunRng {
    stream(seed, LEARNER_STREAM)
}

/// Stream used by the experiment harness to relabel items.
pub fn label_stream(seed: u64) -> RunRng {
    stream(seed, LABEL_STREAM)
}

fn stream(seed: u64, id: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Seed of run `run_id` under `master_seed` (splitmix64 finalizer).
pub fn derive_seed(master_seed: u64, run_id: u64) -> u64 {
    let mut z = master_seed
        .wrapping_add(run_id.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform index in `0..n`, drawn through `u64` so results do not depend on
/// the platform's pointer width.
pub fn index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.gen_range(0..n as u64) as usize
}

/// `count` distinct elements of `pool` chosen uniformly, via a partial
/// Fisher-Yates shuffle over a copy of `pool`.
pub fn choose_distinct<R: Rng + ?Sized, T: Copy>(rng: &mut R, pool: &[T], count: usize) -> Vec<T> {
    assert!(count <= pool.len(), "cannot choose {count} of {}", pool.len());
    let mut buf = pool.to_vec();
    for i in 0..count {
        let j = i + index(rng, buf.len() - i);
        buf.swap(i, j);
    }
    buf.truncate(count);
    buf
}

/// Uniform random permutation of `0..n`.
pub fn permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let all: Vec<usize> = (0..n).collect();
    choose_distinct(rng, &all, n)
}
