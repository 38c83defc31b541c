//! Partition-invariant random streams.
//!
//! Every stochastic computation is split into fixed-size batches; batch `k`
//! draws from ChaCha8 seeded with the master seed on stream `domain·2³² + k`.
//! Results depend on `(seed, trials)` only, never on how batches are spread
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub(crate) const BATCH: u64 = 4096;

/// Independent stream families under one master seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub(crate) enum Domain {
    SumTail = 1,
    Bdiff = 2,
    BdiffPilot = 3,
    Gap = 4,
    Uen = 5,
    RademacherSigns = 6,
    RademacherData = 7,
}

pub(crate) fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 32) | (index & 0xFFFF_FFFF));
    rng
}

/// Sub-seed for nested experiments (outer index `k` of a two-level loop).
pub(crate) fn derive_seed(seed: u64, k: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ k.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Run `trials` in batches on a pool of `workers` threads; returns one
/// value per batch, in batch order.
pub(crate) fn run_batches<T, F>(trials: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync,
{
    let batches = trials.div_ceil(BATCH);
    let job = |b: u64| {
        let start = b * BATCH;
        let count = BATCH.min(trials - start);
        f(b, count)
    };
    if workers <= 1 {
        return (0..batches).map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| (0..batches).into_par_iter().map(job).collect())
}
