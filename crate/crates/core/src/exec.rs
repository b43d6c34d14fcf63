//! Data-parallel execution with a sequential fallback.
//!
//! All maps collect their results in index order, so any reduction performed
//! afterwards is independent of scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise behaves
    /// like [`Execution::Sequential`].
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Evaluates `f(0), …, f(n - 1)` and returns the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Splits `0..n` into fixed-size chunks and maps each chunk. The chunk
    /// layout depends only on `n` and `chunk`, never on the thread count.
    pub fn map_chunks<T, F>(self, n: usize, chunk: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, std::ops::Range<usize>) -> T + Sync + Send,
    {
        let chunk = chunk.max(1);
        let n_chunks = n.div_ceil(chunk);
        self.map(n_chunks, |c| {
            let start = c * chunk;
            f(c, start..(start + chunk).min(n))
        })
    }
}
