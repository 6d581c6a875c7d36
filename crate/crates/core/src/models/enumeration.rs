use super::{GraphModel, Hamiltonian};
use crate::error::{Error, Result};
use crate::histogram::HamiltonianHistogram;

/// Largest vertex count accepted by brute-force enumeration.
pub const ENUMERATION_LIMIT: usize = 24;

fn check_budget(model: &GraphModel) -> Result<usize> {
    let n = model.graph().vertex_count();
    if n > ENUMERATION_LIMIT {
        return Err(Error::EnumerationBudget { n, limit: ENUMERATION_LIMIT });
    }
    Ok(n)
}

fn mask_to_config(mask: u32, config: &mut [u8]) {
    for (v, s) in config.iter_mut().enumerate() {
        *s = ((mask >> v) & 1) as u8;
    }
}

/// Exact counts `c_i = |{σ ∈ Ω : H(σ) = i}|` for `i = 0..=h`.
pub fn enumerate_histogram(model: &GraphModel) -> Result<HamiltonianHistogram> {
    let n = check_budget(model)?;
    let edges = model.graph().edges();
    let m = edges.len() as u32;
    let mut counts = vec![0u64; model.max_hamiltonian() as usize + 1];
    for mask in 0u32..(1u32 << n) {
        let agree = || edges.iter().filter(|&&(u, v)| (mask >> u) & 1 == (mask >> v) & 1).count() as u32;
        let h = match model.hamiltonian_kind() {
            Hamiltonian::Occupied => {
                if edges.iter().any(|&(u, v)| (mask >> u) & (mask >> v) & 1 == 1) {
                    continue;
                }
                mask.count_ones()
            }
            Hamiltonian::Agreements => agree(),
            Hamiltonian::Disagreements => m - agree(),
        };
        counts[h as usize] += 1;
    }
    HamiltonianHistogram::new(counts)
}

/// `Z_model` summed directly over all `2ⁿ` configurations using the model's
/// own weights, without going through the Hamiltonian reduction.
pub fn enumerate_partition_function(model: &GraphModel) -> Result<f64> {
    let n = check_budget(model)?;
    let mut config = vec![0u8; n];
    let mut z = 0.0;
    for mask in 0u32..(1u32 << n) {
        mask_to_config(mask, &mut config);
        z += model.weight(&config);
    }
    Ok(z)
}
