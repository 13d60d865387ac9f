//! Data-parallel fan-out with a sequential fallback.
//!
//! Seed fan-out, batch evaluation, and exhaustive game enumeration are all
//! independent per item. With the `parallel` feature (default) they run on
//! the rayon pool; without it the same entry points run sequentially, which
//! keeps the crate usable on targets where rayon is unwanted and gives the
//! benches a baseline to compare against.

/// Map `f` over `0..n`, collecting results in index order. Sequential.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Map `f` over `0..n`, collecting results in index order, on the rayon
/// pool when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    map_indexed_seq(n, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_in_order() {
        let a = map_indexed(100, |i| i * i);
        let b = map_indexed_seq(100, |i| i * i);
        assert_eq!(a, b);
    }
}
