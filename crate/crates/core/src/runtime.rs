//! Worker-pool helper.
//!
//! All parallel stages write into per-index slots and reduce in index order,
//! so results are identical for any worker count. The pool size is therefore
//! purely a throughput knob; `run` builds a dedicated rayon pool when a
//! thread count is requested and otherwise uses the global one.

use rayon::ThreadPoolBuilder;

/// Environment variable consulted by the CLI to cap worker threads.
pub const THREADS_ENV: &str = "AGEWIRE_THREADS";

/// Run `f` on a pool with `threads` workers (None = rayon default).
pub fn run<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        None => f(),
        Some(n) => {
            let pool = ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("failed to build worker pool");
            pool.install(f)
        }
    }
}

/// Parse a thread-count request from the environment, if present.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok()
}
