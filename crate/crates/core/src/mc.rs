//! Seeded, schedule-independent Monte Carlo estimation.
//!
//! Round `r` draws from its own ChaCha8 stream (`seed`, stream `r`), rounds
//! are grouped into fixed batches, and batch partial sums are combined in
//! batch order. The estimate is therefore bitwise identical under any
//! rayon pool size.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::scalar::Scalar;

const BATCH: u64 = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub mean: T,
    /// Sample standard deviation over `sqrt(samples)`.
    pub stderr: T,
    pub samples: u64,
}

/// Generator for round `round` under master seed `seed`.
pub fn round_rng(seed: u64, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(round);
    rng
}

fn batches(samples: u64) -> impl IndexedParallelIterator<Item = std::ops::Range<u64>> {
    let count = samples.div_ceil(BATCH) as usize;
    (0..count)
        .into_par_iter()
        .map(move |b| b as u64 * BATCH..((b as u64 + 1) * BATCH).min(samples))
}

/// Mean of `sample` over `samples` independent rounds.
pub fn estimate<T, F>(samples: u64, seed: u64, sample: F) -> Estimate<T>
where
    T: Scalar,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    assert!(samples > 0, "at least one sample is required");
    let partial: Vec<(T, T)> = batches(samples)
        .map(|range| {
            range.fold((T::zero(), T::zero()), |(s, q), r| {
                let v = sample(&mut round_rng(seed, r));
                (s + v, q + v * v)
            })
        })
        .collect();
    let (sum, sumsq) = partial
        .into_iter()
        .fold((T::zero(), T::zero()), |(s, q), (a, b)| (s + a, q + b));
    finish(sum, sumsq, samples)
}

/// Acceptance frequency of a randomized yes/no experiment. Counts are
/// integers, so the result does not depend on summation order at all.
pub fn estimate_probability<T, F>(samples: u64, seed: u64, trial: F) -> Estimate<T>
where
    T: Scalar,
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    assert!(samples > 0, "at least one sample is required");
    let hits: u64 = batches(samples)
        .map(|range| range.filter(|&r| trial(&mut round_rng(seed, r))).count() as u64)
        .sum();
    let h = T::from_u64(hits).expect("count fits");
    finish(h, h, samples)
}

fn finish<T: Scalar>(sum: T, sumsq: T, samples: u64) -> Estimate<T> {
    let n = T::from_u64(samples).expect("count fits");
    let mean = sum / n;
    let stderr = if samples > 1 {
        let var = ((sumsq - n * mean * mean) / (n - T::one())).max(T::zero());
        (var / n).sqrt()
    } else {
        T::zero()
    };
    Estimate {
        mean,
        stderr,
        samples,
    }
}
