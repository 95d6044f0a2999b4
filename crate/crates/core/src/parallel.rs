//! Data-parallel map over independent jobs, with a sequential fallback.
//!
//! With the `parallel` feature, jobs run on a rayon pool whose size is the smaller of the
//! requested thread count and `COPEKIT_THREADS`. Without it, or with one thread, jobs run in order.
//! Either way the output order matches the input order.

pub const THREADS_ENV: &str = "COPEKIT_THREADS";

/// Thread cap from the environment, if set to a positive integer.
pub fn env_thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Effective worker count for a request (`None` = use every available core).
pub fn effective_threads(requested: Option<usize>) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut n = requested.unwrap_or(available).max(1);
    if let Some(cap) = env_thread_cap() {
        n = n.min(cap);
    }
    if cfg!(feature = "parallel") {
        n
    } else {
        1
    }
}

pub fn map<T, F>(jobs: usize, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let n = effective_threads(threads);
    if n <= 1 || jobs <= 1 {
        return (0..jobs).map(f).collect();
    }
    par_map(jobs, n, f)
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(jobs: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..jobs).into_par_iter().map(&f).collect()),
        Err(_) => (0..jobs).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(jobs: usize, _threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..jobs).map(f).collect()
}
