//! Deterministic fan-out of independent campaign runs.

use rayon::prelude::*;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "BELL_LAB_THREADS";

/// `BELL_LAB_THREADS` if set to a positive integer, else machine parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Evaluates `f(0..runs)` in parallel and returns results in run order.
/// Each run must derive its randomness from its index alone.
pub fn map_runs<T, F>(runs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let threads = thread_count();
    if threads <= 1 || runs <= 1 {
        return (0..runs as u64).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..runs as u64).into_par_iter().map(&f).collect()),
        Err(_) => (0..runs as u64).map(f).collect(),
    }
}
