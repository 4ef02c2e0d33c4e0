//! Order-preserving data-parallel maps.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it, or through the `_seq` variants, it runs on the calling thread.
//! Results come back in index order either way, so reductions over them are
//! bit-identical regardless of thread count.

/// Maps `f` over `0..n`, returning results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(n, f)
    }
}

/// Sequential counterpart of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maps `f` over a slice in chunks of `chunk` elements.
pub fn map_chunks<'a, S, T, F>(items: &'a [S], chunk: usize, f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&'a [S]) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_chunks(chunk).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.chunks(chunk).map(f).collect()
    }
}

/// Whether this build fans work out over threads.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = map_indexed(1000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
        assert_eq!(v, map_indexed_seq(1000, |i| i * i));
        let data: Vec<u32> = (0..103).collect();
        let sums = map_chunks(&data, 10, |c| c.iter().sum::<u32>());
        assert_eq!(sums.len(), 11);
        assert_eq!(sums.iter().sum::<u32>(), data.iter().sum::<u32>());
    }
}
