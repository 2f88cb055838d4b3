//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) the batch helpers fan out over the
//! rayon pool; without it they run on the calling thread. Both paths return
//! results ordered by index, so callers see identical output either way.

/// Evaluates `f(i)` for `i in 0..n`, in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indexed_parallel(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_sequential(n, f)
    }
}

pub fn map_indexed_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_indexed_parallel<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Whether batch helpers run on the rayon pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
