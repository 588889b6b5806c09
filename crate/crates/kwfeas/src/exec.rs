//! Execution helpers: data-parallel map/filter over work items with a
//! sequential fallback when the `parallel` feature is off.
//!
//! Output order always equals input order, so results are identical
//! with and without the feature and for any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over items, collecting in input order.
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Keep the items passing the predicate, preserving order.
pub fn filter_collect<T, F>(items: Vec<T>, keep: F) -> Vec<T>
where
    T: Send + Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().filter(|t| keep(t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().filter(|t| keep(t)).collect()
    }
}

/// Cap the global worker count. Call at most once, before any parallel
/// work; later calls report failure. No-op without the feature.
pub fn set_jobs(n: usize) -> crate::Result<()> {
    #[cfg(feature = "parallel")]
    {
        if n == 0 {
            return Err(crate::Error::Parse("jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| crate::Error::Catalog(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
    }
    Ok(())
}

/// Run `f` inside a dedicated pool of `threads` workers (used by the
/// benchmarks to compare thread counts without touching global state).
#[cfg(feature = "parallel")]
pub fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("local thread pool")
        .install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<u64> = (0..1000).collect();
        let doubled = map_collect(&items, |&x| x * 2);
        assert_eq!(doubled, (0..1000).map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn filter_preserves_order() {
        let items: Vec<u64> = (0..1000).collect();
        let evens = filter_collect(items, |&x| x % 2 == 0);
        assert_eq!(evens, (0..1000).filter(|x| x % 2 == 0).collect::<Vec<_>>());
    }
}
