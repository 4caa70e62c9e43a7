//! Data-parallel execution of independent jobs.
//!
//! Sweeps, multi-seed experiments and field scans all decompose into jobs
//! that own their seed and share nothing, so they can run on a rayon pool
//! without changing any result: outputs are collected in input order and
//! each job's randomness derives from (base seed, job index) alone. With
//! `--no-default-features` the crate builds without rayon and [`run_jobs`]
//! degrades to the sequential loop; results are identical either way, which
//! `benches/parallel.rs` exploits to compare the two paths.

/// Map `f` over `inputs` sequentially.
pub fn run_jobs_sequential<T, R, F>(inputs: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R + Sync + Send,
    T: Send,
    R: Send,
{
    inputs.into_iter().map(f).collect()
}

/// Map `f` over `inputs` on the current rayon pool, preserving input order.
#[cfg(feature = "parallel")]
pub fn run_jobs_parallel<T, R, F>(inputs: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R + Sync + Send,
    T: Send,
    R: Send,
{
    use rayon::prelude::*;
    inputs.into_par_iter().map(f).collect()
}

/// Map `f` over independent jobs; parallel when the `parallel` feature is
/// enabled (the default), sequential otherwise.
pub fn run_jobs<T, R, F>(inputs: Vec<T>, f: F) -> Vec<R>
where
    F: Fn(T) -> R + Sync + Send,
    T: Send,
    R: Send,
{
    #[cfg(feature = "parallel")]
    {
        run_jobs_parallel(inputs, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_jobs_sequential(inputs, f)
    }
}
