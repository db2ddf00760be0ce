//! Data-parallel dispatch with a sequential fallback.
//!
//! Every helper here evaluates a closure over an indexed range of work items
//! and returns the results in index order. Callers reduce the returned vector
//! themselves, front to back, so the floating-point reduction order depends
//! only on how the work was partitioned, never on the number of worker
//! threads or on whether the `parallel` feature is enabled.

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Sequential version of [`map_indexed`]; always available so benches and
/// tests can compare the two paths in one build.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Whether this build dispatches through rayon.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Splits `0..len` into `parts` contiguous ranges whose cumulative `weight`
/// is roughly equal. Depends only on its arguments.
pub fn balanced_ranges(
    len: usize,
    parts: usize,
    weight: impl Fn(usize) -> f64,
) -> Vec<std::ops::Range<usize>> {
    if len == 0 {
        return Vec::new();
    }
    let parts = parts.clamp(1, len);
    let total: f64 = (0..len).map(&weight).sum();
    let mut ranges = Vec::with_capacity(parts);
    let mut start = 0;
    let mut acc = 0.0;
    for idx in 0..len {
        acc += weight(idx);
        let done = ranges.len() + 1;
        let remaining_items = len - idx - 1;
        let remaining_parts = parts - done;
        if done < parts
            && remaining_items >= remaining_parts
            && (acc >= total * done as f64 / parts as f64 || remaining_items == remaining_parts)
        {
            ranges.push(start..idx + 1);
            start = idx + 1;
        }
    }
    ranges.push(start..len);
    ranges
}
