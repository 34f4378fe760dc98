//! Work distribution for independent tasks.
//!
//! Every parallel code path in the crate goes through [`Executor`]. Chunk
//! boundaries do not depend on the thread count and results come back in
//! chunk order.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Selects how independent tasks are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Executor {
    /// Run every chunk on the calling thread.
    Sequential,
    /// Run chunks on the rayon pool. Falls back to [`Executor::Sequential`]
    /// when the crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Executor {
    /// True when this executor will actually use more than the calling thread.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Executor::Parallel
    }

    /// Applies `f` to consecutive ranges of `0..len` of at most `chunk` items
    /// and returns the results in range order.
    pub fn map_chunks<T, F>(self, len: usize, chunk: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(Range<usize>) -> T + Sync + Send,
    {
        let chunk = chunk.max(1);
        let ranges: Vec<Range<usize>> = (0..len).step_by(chunk).map(|lo| lo..(lo + chunk).min(len)).collect();
        match self {
            #[cfg(feature = "parallel")]
            Executor::Parallel => ranges.into_par_iter().map(f).collect(),
            _ => ranges.into_iter().map(f).collect(),
        }
    }

    /// Applies `f` to every index in `0..len`, preserving order.
    pub fn map_indices<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Executor::Parallel => (0..len).into_par_iter().map(f).collect(),
            _ => (0..len).map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        for exec in [Executor::Sequential, Executor::Parallel] {
            let parts = exec.map_chunks(10, 3, |r| r.collect::<Vec<_>>());
            assert_eq!(parts.concat(), (0..10).collect::<Vec<_>>());
            assert_eq!(parts.len(), 4);
        }
    }

    #[test]
    fn empty_input_gives_no_chunks() {
        assert!(Executor::Parallel.map_chunks(0, 8, |r| r.len()).is_empty());
    }
}
