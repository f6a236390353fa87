//! Execution policy for the data-parallel loops.
//!
//! Every parallel loop in the crate goes through [`Execution::map`], which
//! returns results in index order. Reductions are then performed sequentially
//! on that ordered vector, so the degree of parallelism never changes a
//! numeric result. Without the `parallel` feature both variants run on the
//! calling thread.

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
    /// Evaluates `f(0), …, f(n-1)` and returns them in index order.
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

    /// Like [`map`](Self::map) over a slice.
    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_preserve_order() {
        let f = |i: usize| i * i;
        let a = Execution::Sequential.map(1000, f);
        let b = Execution::Parallel.map(1000, f);
        assert_eq!(a, b);
        assert_eq!(a[31], 961);
    }
}
