//! The eager mode asks for every sample in one oracle round; the lazy mode
//! asks only for what the search and the chosen branch need. Both give the
//! same estimate bit for bit.

use gibbs_anneal::annealer::{anneal, one_round_plan, AnnealConfig, SamplingMode};
use gibbs_anneal::oracle::HistogramBackend;
use gibbs_anneal::{HamiltonianHistogram, InverseTemperature};

fn main() -> gibbs_anneal::Result<()> {
    let hist = HamiltonianHistogram::new(vec![4, 20, 60, 90, 60, 20, 4])?;
    let backend = HistogramBackend::new(hist.clone());
    let base = AnnealConfig::new(InverseTemperature::ZERO, InverseTemperature::INFINITY, 0.3, hist.q(), 6).with_seed(1);

    let plan = one_round_plan(&base)?;
    println!("one-round plan: {} requests, {} samples", plan.requests.len(), plan.total_samples());

    for mode in [SamplingMode::Eager, SamplingMode::Lazy] {
        let run = anneal(&base.with_mode(mode), &backend, 0)?;
        let m = run.estimate.metrics;
        println!(
            "{mode:?}: ln Q {:.6} ({:#018x}) rounds {} samples {} depth {}",
            run.estimate.log_q_hat,
            run.estimate.log_q_hat.to_bits(),
            m.oracle_rounds,
            m.total_samples,
            m.reduction_depth
        );
    }
    Ok(())
}
