//! Replicate fan-out.
//!
//! With the `parallel` feature (default) the work is spread over the rayon
//! pool; without it everything runs on the calling thread. Both paths return
//! results in index order so reductions are bitwise reproducible.

/// Evaluate `f(0), ..., f(count - 1)`, in parallel when available.
pub fn map_indexed<T, F>(count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(count, f)
    }
}

/// Sequential reference path; always available.
pub fn map_indexed_seq<T, F>(count: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count).map(f).collect()
}

/// Size the global worker pool. A no-op without the `parallel` feature.
/// Returns `false` if the pool had already been initialised.
pub fn set_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        true
    }
}

/// Split `total` items into shards of at most `shard` items.
pub fn shard_sizes(total: u64, shard: u64) -> Vec<u64> {
    let shard = shard.max(1);
    let full = total / shard;
    let mut out = vec![shard; full as usize];
    if !total.is_multiple_of(shard) {
        out.push(total % shard);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential() {
        let f = |i: u64| i.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(7);
        assert_eq!(map_indexed(1000, f), map_indexed_seq(1000, f));
    }

    #[test]
    fn shards_cover_total() {
        assert_eq!(shard_sizes(10, 4), vec![4, 4, 2]);
        assert_eq!(shard_sizes(8, 4), vec![4, 4]);
        assert!(shard_sizes(0, 4).is_empty());
    }
}
