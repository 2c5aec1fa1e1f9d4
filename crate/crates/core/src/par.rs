use rayon::prelude::*;

/// Maps `f` over `items`, preserving input order in the output.
///
/// `workers <= 1` runs on the calling thread; anything larger runs on a
/// dedicated pool of that many threads.
pub(crate) fn ordered_map<T, U, F>(items: &[T], workers: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    if workers <= 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(err) => {
            log::warn!("could not start {workers} workers ({err}); running sequentially");
            items.iter().map(f).collect()
        }
    }
}
