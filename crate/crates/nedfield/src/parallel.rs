//! Replication scheduling. Replications are embarrassingly parallel with
//! independent derived streams; results come back indexed by replication, so
//! the outcome is identical for any worker count. The `parallel` feature
//! selects the rayon backend; without it everything runs sequentially.

/// Evaluate `f(rep)` for `rep` in `0..reps` and collect results in
/// replication order. `threads` = 0 uses the default pool, 1 forces the
/// sequential path, otherwise a dedicated pool of that size.
pub fn run_reps<T, F>(reps: u64, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if threads == 1 {
            return (0..reps).map(f).collect();
        }
        if threads == 0 {
            return (0..reps).into_par_iter().map(f).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("failed to build worker pool");
        pool.install(|| (0..reps).into_par_iter().map(f).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        (0..reps).map(f).collect()
    }
}
