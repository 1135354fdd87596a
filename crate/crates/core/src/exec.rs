//! Choice between the rayon thread pool and a plain loop.

/// How data-parallel loops run. Without the `parallel` feature both
/// variants execute sequentially.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Maps every index of `0..n` and folds the results with `merge`, which
    /// must be associative and commutative for results to be schedule
    /// independent.
    pub fn map_reduce<T, I, M, R>(self, n: u64, identity: I, map: M, merge: R) -> T
    where
        T: Send,
        I: Fn() -> T + Sync + Send,
        M: Fn(u64) -> T + Sync + Send,
        R: Fn(T, T) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(map).reduce(&identity, &merge)
            }
            _ => (0..n).map(map).fold(identity(), merge),
        }
    }

    /// Order-preserving parallel map.
    pub fn map_collect<T, M>(self, n: usize, map: M) -> Vec<T>
    where
        T: Send,
        M: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(map).collect()
            }
            _ => (0..n).map(map).collect(),
        }
    }
}
