//! Deterministic parallel execution over independent sample ranges.
//!
//! Work is cut into fixed-size chunks addressed by chunk index; partial
//! results are collected by index and folded in chunk order. Results are
//! therefore bitwise identical for any worker count.

use rayon::prelude::*;
use std::ops::Range;

/// Fixed chunk width, independent of the worker count.
pub const CHUNK: u64 = 8192;

fn pool(workers: usize) -> rayon::ThreadPool {
    let threads = if workers == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        workers
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction")
}

/// Maps every chunk of `0..samples` in parallel and folds the partials in
/// chunk order.
pub fn chunked<T, F>(samples: u64, workers: usize, map: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    let chunks: Vec<Range<u64>> = (0..samples)
        .step_by(CHUNK as usize)
        .map(|s| s..(s + CHUNK).min(samples))
        .collect();
    pool(workers).install(|| chunks.into_par_iter().map(map).collect())
}

pub fn chunked_sum_u64<F>(samples: u64, workers: usize, map: F) -> u64
where
    F: Fn(Range<u64>) -> u64 + Sync + Send,
{
    chunked(samples, workers, map).into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partials_fold_in_chunk_order() {
        let v = chunked(3 * CHUNK + 17, 4, |r| r.start);
        assert_eq!(v, vec![0, CHUNK, 2 * CHUNK, 3 * CHUNK]);
    }

    #[test]
    fn sum_is_worker_invariant() {
        let f = |r: Range<u64>| r.map(|i| i * i % 97).sum::<u64>();
        let a = chunked_sum_u64(100_000, 1, f);
        let b = chunked_sum_u64(100_000, 3, f);
        assert_eq!(a, b);
    }
}
