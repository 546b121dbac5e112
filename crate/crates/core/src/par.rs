//! Parallel/sequential switch used by the evaluation sweeps.
//!
//! With the `parallel` feature the helpers fan out over rayon; without it
//! they degrade to plain iteration. Results are collected in input order in
//! both builds, so callers observe identical output either way.

#[cfg(feature = "parallel")]
pub(crate) fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_slice<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Maps `f` over `0..count`, collecting results in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_range<U, F>(count: u64, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(u64) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<U, F>(count: u64, f: F) -> Vec<U>
where
    F: Fn(u64) -> U,
{
    (0..count).map(f).collect()
}
