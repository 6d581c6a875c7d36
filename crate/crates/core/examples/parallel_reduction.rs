//! Balanced tree reductions give the same floating-point result whatever
//! the thread count.

use gibbs_anneal::reduce::{tree_depth, tree_sum};

fn main() {
    let n = 1_000_003;
    let term = |i: usize| 1.0 / ((i + 1) as f64).powi(2);
    let mut bits = Vec::new();
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let s = pool.install(|| tree_sum(n, &term));
        println!("{threads} thread(s): {s:.15}");
        bits.push(s.to_bits());
    }
    assert!(bits.windows(2).all(|w| w[0] == w[1]));
    println!("depth of the reduction tree: {}", tree_depth(n));
}
