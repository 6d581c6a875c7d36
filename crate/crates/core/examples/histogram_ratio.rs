//! Estimate Z(β_max)/Z(β_min) for a known Hamiltonian histogram and compare
//! with the exact value.

use gibbs_anneal::annealer::{anneal, AnnealConfig};
use gibbs_anneal::oracle::HistogramBackend;
use gibbs_anneal::{HamiltonianHistogram, InverseTemperature};

fn main() -> gibbs_anneal::Result<()> {
    // c_i = number of states with H = i.
    let hist = HamiltonianHistogram::new(vec![3, 40, 900, 12_000, 50_000])?;
    let (lo, hi) = (InverseTemperature::ZERO, InverseTemperature::new(3.0)?);
    let exact = hist.log_z(hi)? - hist.log_z(lo)?;

    let eps = 0.1;
    let config = AnnealConfig::new(lo, hi, eps, hist.q(), hist.max_hamiltonian() as u64).with_seed(7);
    let run = anneal(&config, &HistogramBackend::new(hist), 0)?;

    println!("branch        {:?}", run.branch);
    println!("ln Q exact    {exact:.5}");
    println!("ln Q estimate {:.5}", run.estimate.log_q_hat);
    println!("within ±{eps}:  {}", run.estimate.within(exact, eps));
    println!("{:#?}", run.estimate.metrics);
    Ok(())
}
