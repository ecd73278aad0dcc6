//! Worker pool shared by the renderer and backward pass.
//!
//! `TSPLAT_THREADS` limits the worker count; the default is the available
//! parallelism. Results do not depend on the thread count: per-tile outputs
//! are merged in tile order.

use once_cell::sync::Lazy;
use rayon::{ThreadPool, ThreadPoolBuilder};

static POOL: Lazy<ThreadPool> = Lazy::new(|| {
    let threads = std::env::var("TSPLAT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    ThreadPoolBuilder::new()
        .num_threads(threads)
        .thread_name(|i| format!("tsplat-{i}"))
        .build()
        .expect("failed to build worker pool")
});

pub fn pool() -> &'static ThreadPool {
    &POOL
}
