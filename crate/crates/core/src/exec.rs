//! Execution policy for batch loops.
//!
//! Every data-parallel loop in the crate goes through [`Exec`]. With the
//! `parallel` feature disabled, [`Exec::Parallel`] degrades to the
//! sequential path, so results never depend on the feature set.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// Like [`Exec::map`] but bounded to `workers` threads; 0 uses the global
    /// pool.
    pub fn map_bounded<T, R, F>(self, workers: usize, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(not(feature = "parallel"))]
        let _ = workers;
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel if workers == 0 => items.par_iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel if workers > 1 => {
                match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                    Ok(pool) => pool.install(|| items.par_iter().map(f).collect()),
                    Err(_) => items.iter().map(f).collect(),
                }
            }
            _ => items.iter().map(f).collect(),
        }
    }
}
