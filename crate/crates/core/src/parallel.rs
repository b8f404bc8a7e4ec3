//! Worker pools for the sampling and enumeration loops.

/// Run `f` on a dedicated pool of `workers` threads (0 means the current
/// pool). Results of the library's parallel loops never depend on the
/// worker count; merges are integer sums.
pub fn install<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to start worker pool");
    pool.install(f)
}

/// Machine parallelism, used as the default worker count.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
