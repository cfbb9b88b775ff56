//! Execution seam for the data-parallel sampling loops.
//!
//! Every estimator in this crate is an indexed map followed by an ordered
//! reduction: work item `i` derives its own RNG substream from the master
//! seed, so the result is identical whatever the schedule. With the
//! `parallel` feature (default) the map runs on rayon; without it the
//! sequential fallback below is used. [`indexed_map_serial`] is always
//! available so benchmarks can compare both paths in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, preserving index order in the output.
#[cfg(feature = "parallel")]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n`, preserving index order in the output.
#[cfg(not(feature = "parallel"))]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    indexed_map_serial(n, f)
}

/// The sequential fallback, independent of the feature flag.
pub fn indexed_map_serial<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Caps the global worker pool at `threads` if possible. Called once by the
/// CLI when `NILMETRY_THREADS` is set; later calls are ignored because the
/// pool can only be built once. A no-op without the `parallel` feature.
pub fn configure_thread_cap(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
    }
}
