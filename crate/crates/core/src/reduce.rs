//! Fixed-shape balanced tree reductions.
//!
//! The tree always splits a range at its index midpoint, so the floating
//! point result depends only on the input length, never on how many
//! workers evaluate it. A tree over `n` leaves has depth `⌈log₂ n⌉`.

/// Ranges at least this long fork their halves onto the rayon pool.
const PARALLEL_CUTOFF: usize = 1 << 14;

/// `⌈log₂ n⌉`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Depth of the midpoint tree over `n` leaves.
pub fn tree_depth(n: usize) -> u32 {
    ceil_log2(n as u64)
}

/// Reduces `leaf(0), …, leaf(n-1)` with `combine` along the midpoint tree.
/// Returns `None` for `n = 0`.
pub fn tree_reduce<T, L, C>(n: usize, leaf: &L, combine: &C) -> Option<T>
where
    T: Send,
    L: Fn(usize) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    (n > 0).then(|| reduce_range(0, n, leaf, combine))
}

fn reduce_range<T, L, C>(lo: usize, hi: usize, leaf: &L, combine: &C) -> T
where
    T: Send,
    L: Fn(usize) -> T + Sync,
    C: Fn(T, T) -> T + Sync,
{
    let len = hi - lo;
    if len == 1 {
        return leaf(lo);
    }
    let mid = lo + len / 2;
    let (a, b) = if len >= PARALLEL_CUTOFF {
        rayon::join(
            || reduce_range(lo, mid, leaf, combine),
            || reduce_range(mid, hi, leaf, combine),
        )
    } else {
        (
            reduce_range(lo, mid, leaf, combine),
            reduce_range(mid, hi, leaf, combine),
        )
    };
    combine(a, b)
}

/// Pairwise sum of `f(0) + … + f(n-1)`; `0.0` when empty.
pub fn tree_sum<F: Fn(usize) -> f64 + Sync>(n: usize, f: &F) -> f64 {
    tree_reduce(n, f, &|a: f64, b: f64| a + b).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measured_depth(n: usize) -> u32 {
        tree_reduce(n, &|_| 0u32, &|a: u32, b: u32| a.max(b) + 1).unwrap_or(0)
    }

    #[test]
    fn depth_formula_matches_tree() {
        for n in 1..300 {
            assert_eq!(measured_depth(n), tree_depth(n), "n = {n}");
        }
        assert_eq!(measured_depth(PARALLEL_CUTOFF * 3 + 7), tree_depth(PARALLEL_CUTOFF * 3 + 7));
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1025), 11);
    }

    #[test]
    fn reduction_is_worker_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (i as f64 + 1.0);
        let n = 200_000;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = one.install(|| tree_sum(n, &f));
        let b = many.install(|| tree_sum(n, &f));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(tree_sum(0, &|_| 1.0), 0.0);
        assert_eq!(tree_sum(1, &|_| 2.5), 2.5);
        assert_eq!(tree_sum(10, &|i| i as f64), 45.0);
    }
}
