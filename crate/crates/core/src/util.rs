//! Small internal helpers.

/// Map `f` over `items`, in parallel where a thread pool is available.
///
/// The result order always equals the input order (rayon's indexed collect),
/// so callers get identical output regardless of thread count. On wasm32 the
/// sequential path is used unconditionally: spawning worker threads is not
/// available there, and every caller is required to produce output that does
/// not depend on the execution strategy anyway.
#[cfg(not(target_arch = "wasm32"))]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(target_arch = "wasm32")]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}
