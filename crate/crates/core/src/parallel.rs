//! Worker pool sized by `FBMWALK_THREADS`.

use std::sync::OnceLock;

use rayon::{ThreadPool, ThreadPoolBuilder};

pub const THREADS_ENV: &str = "FBMWALK_THREADS";

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let cap = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0);
        let mut builder = ThreadPoolBuilder::new();
        if let Some(n) = cap {
            builder = builder.num_threads(n);
        }
        builder.build().expect("worker pool")
    })
}

/// Runs `f` inside the shared pool; rayon calls in `f` use its workers.
pub fn with_workers<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}

pub fn worker_count() -> usize {
    pool().current_num_threads()
}
