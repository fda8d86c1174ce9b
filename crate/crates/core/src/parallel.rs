//! Execution mode switch shared by the solver and the verification suite.
//!
//! With the `parallel` feature disabled every mode runs on the calling thread.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

/// Environment variable capping the worker count; `0` or unset means automatic.
pub const THREADS_ENV: &str = "COVHYP_THREADS";

#[cfg(feature = "parallel")]
fn pool() -> &'static rayon::ThreadPool {
    use std::sync::OnceLock;
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("failed to build worker pool")
    })
}

/// Number of workers a parallel map would use.
pub fn worker_count(mode: ExecMode) -> usize {
    match mode {
        ExecMode::Sequential => 1,
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => pool().current_num_threads(),
        #[cfg(not(feature = "parallel"))]
        ExecMode::Parallel => 1,
    }
}

/// `out[i] = f(i)` for `i in 0..n`; results are independent of the mode.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            pool().install(|| (0..n).into_par_iter().map(f).collect())
        }
        #[cfg(not(feature = "parallel"))]
        ExecMode::Parallel => (0..n).map(f).collect(),
    }
}
