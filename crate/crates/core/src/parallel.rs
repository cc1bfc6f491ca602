//! Data-parallel helpers. Without the `parallel` feature everything runs on
//! the calling thread.

/// `(0..n).map(f)`, possibly spread over the rayon pool. Output order is
/// always the index order.
pub fn map_indexed<T, F>(n: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Whether the crate was built with the rayon backend.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}
