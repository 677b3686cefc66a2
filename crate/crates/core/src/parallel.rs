//! Worker-pool selection.

use crate::error::{Error, Result};

/// Runs `f` on a dedicated pool of `workers` threads. `None` uses the
/// ambient rayon pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::invalid("worker count must be positive")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Number of threads in the current pool.
pub fn current_workers() -> usize {
    rayon::current_num_threads()
}
