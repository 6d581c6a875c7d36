//! Brute-force reference arithmetic for integration tests, written without
//! touching the library's own numerics.

#![allow(dead_code)]

use rand::Rng;

/// `ln Σ_i c_i e^{-iβ}`; `β = +∞` gives `ln c_0`.
pub fn log_z(counts: &[u64], beta: f64) -> f64 {
    if beta.is_infinite() {
        return (counts[0] as f64).ln();
    }
    let terms: Vec<f64> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &c)| (c as f64).ln() - beta * i as f64)
        .collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// Gibbs law of `H` at finite or infinite β.
pub fn distribution(counts: &[u64], beta: f64) -> Vec<f64> {
    if beta.is_infinite() {
        let mut p = vec![0.0; counts.len()];
        p[0] = 1.0;
        return p;
    }
    let z = log_z(counts, beta);
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| if c == 0 { 0.0 } else { ((c as f64).ln() - beta * i as f64 - z).exp() })
        .collect()
}

/// `E_β[H]`.
pub fn mean_energy(counts: &[u64], beta: f64) -> f64 {
    distribution(counts, beta).iter().enumerate().map(|(i, p)| i as f64 * p).sum()
}

/// `Pr_β[H ≥ 1]`.
pub fn excited(counts: &[u64], beta: f64) -> f64 {
    1.0 - distribution(counts, beta)[0]
}

/// `ln E_β[e^{aH}]`, summed term by term with a max shift.
pub fn log_mgf(counts: &[u64], beta: f64, a: f64) -> f64 {
    let p = distribution(counts, beta);
    let terms: Vec<f64> = p
        .iter()
        .enumerate()
        .filter(|(_, &pi)| pi > 0.0)
        .map(|(i, pi)| pi.ln() + a * i as f64)
        .collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// `h ∈ [2, 64]`, `c_0 ≥ 1`, total count at most `10⁶`.
pub fn random_counts<R: Rng>(rng: &mut R) -> Vec<u64> {
    let h = rng.random_range(2..=64usize);
    let cap = 1_000_000 / (h as u64 + 1);
    let mut counts: Vec<u64> = (0..=h)
        .map(|_| if rng.random_bool(0.6) { rng.random_range(0..=cap) } else { 0 })
        .collect();
    counts[0] = counts[0].max(1);
    if counts[h] == 0 {
        counts[h] = 1;
    }
    counts
}

pub fn total_log(counts: &[u64]) -> f64 {
    (counts.iter().sum::<u64>() as f64).ln()
}

/// Random simple graph on `n` vertices, each edge present with probability `p`.
pub fn random_edges<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// `Σ_{S independent} λ^{|S|}` by listing subsets.
pub fn hard_core_z(n: usize, edges: &[(usize, usize)], lambda: f64) -> f64 {
    (0u32..1 << n)
        .filter(|s| edges.iter().all(|&(u, v)| s >> u & 1 == 0 || s >> v & 1 == 0))
        .map(|s| lambda.powi(s.count_ones() as i32))
        .sum()
}

/// `Σ_σ γ^{#monochromatic edges}` over `σ ∈ {0,1}ⁿ`.
pub fn ising_z(n: usize, edges: &[(usize, usize)], gamma: f64) -> f64 {
    (0u32..1 << n)
        .map(|s| {
            let mono = edges.iter().filter(|&&(u, v)| (s >> u & 1) == (s >> v & 1)).count();
            gamma.powi(mono as i32)
        })
        .sum()
}

/// Distribution of the reduced Hamiltonian for a hard-core model at `β`:
/// `Pr[|S| = k] ∝ (#independent sets of size k)·e^{-βk}`.
pub fn hard_core_counts(n: usize, edges: &[(usize, usize)]) -> Vec<u64> {
    let mut counts = vec![0u64; n + 1];
    for s in 0u32..1 << n {
        if edges.iter().all(|&(u, v)| s >> u & 1 == 0 || s >> v & 1 == 0) {
            counts[s.count_ones() as usize] += 1;
        }
    }
    counts
}

/// Counts of `m − m(σ)` (ferromagnetic) or `m(σ)` (antiferromagnetic).
pub fn ising_counts(n: usize, edges: &[(usize, usize)], ferro: bool) -> Vec<u64> {
    let m = edges.len();
    let mut counts = vec![0u64; m + 1];
    for s in 0u32..1 << n {
        let mono = edges.iter().filter(|&&(u, v)| (s >> u & 1) == (s >> v & 1)).count();
        counts[if ferro { m - mono } else { mono }] += 1;
    }
    counts
}

pub fn ceil_log2(n: u64) -> u32 {
    let mut k = 0;
    while (1u64 << k) < n {
        k += 1;
    }
    k
}
