//! Execution mode for the data-parallel inner loops.
//!
//! With the `parallel` feature (default) the parallel paths run on rayon's
//! global pool. Without it, [`Execution::Parallel`] silently runs the
//! sequential path, so callers never need to `cfg` on the feature.
//!
//! Both modes produce bitwise-identical results: parallel work is split
//! into disjoint, independently computed items that are reassembled in
//! index order, and no floating-point reduction is ever parallelized.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Evaluates `f(0..n)` and returns the results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }
}
