//! Deterministic fan-out over index ranges.

use std::num::NonZeroUsize;
use std::thread;

/// Evaluates `f(0..n)` on up to `workers` scoped threads, each handling one
/// contiguous chunk. The output is in index order, so any reduction over it
/// is independent of the worker count.
pub fn ordered_map<T, F>(n: usize, workers: NonZeroUsize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.get().min(n.max(1));
    if workers == 1 {
        return (0..n).map(&f).collect();
    }
    let chunk = n.div_ceil(workers);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = (w * chunk).min(n);
                let hi = ((w + 1) * chunk).min(n);
                scope.spawn(move || (lo..hi).map(f).collect::<Vec<T>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}
