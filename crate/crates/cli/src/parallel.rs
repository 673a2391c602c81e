//! Thread-count-invariant parallelism for Monte-Carlo loops. Each trial
//! derives its own child seed in the core, so a sum over any chunking of
//! the trial range is identical; threads only change who computes which
//! chunk.

use crate::formats::AnyResult;

/// Sums `chunk(lo, hi)` over a partition of `lo..hi` into at most
/// `threads` contiguous ranges, in range order.
pub fn parallel_sum<F>(lo: u64, hi: u64, threads: usize, chunk: F) -> AnyResult<u64>
where
    F: Fn(u64, u64) -> AnyResult<u64> + Sync,
{
    let threads = threads.max(1) as u64;
    let total = hi.saturating_sub(lo);
    if total == 0 {
        return Ok(0);
    }
    let per = total.div_ceil(threads);
    let ranges: Vec<(u64, u64)> = (0..threads)
        .map(|i| (lo + i * per, (lo + (i + 1) * per).min(hi)))
        .filter(|(a, b)| a < b)
        .collect();
    if ranges.len() == 1 {
        return chunk(ranges[0].0, ranges[0].1);
    }
    let chunk = &chunk;
    let results: Vec<AnyResult<u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .iter()
            .map(|&(a, b)| scope.spawn(move || chunk(a, b)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut sum = 0u64;
    for r in results {
        sum += r?;
    }
    Ok(sum)
}
