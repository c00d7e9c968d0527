//! Order-preserving parallel map; sequential without the `parallel` feature.

#[cfg(feature = "parallel")]
pub fn map<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T: Sync, U: Send, F: Fn(&T) -> U + Sync + Send>(items: &[T], f: F) -> Vec<U> {
    items.iter().map(f).collect()
}

/// Sum of `f(i)` over `0..n`, reduced in fixed-size chunks so the result does not depend on scheduling.
pub fn chunked_sum<F: Fn(usize) -> f64 + Sync + Send>(n: usize, f: F) -> f64 {
    const CHUNK: usize = 1 << 14;
    let starts: Vec<usize> = (0..n).step_by(CHUNK).collect();
    let partial = map(&starts, |&s| (s..(s + CHUNK).min(n)).map(&f).sum::<f64>());
    partial.iter().sum()
}
