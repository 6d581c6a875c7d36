//! Median boosting: repeat independent runs and take the median to push the
//! failure probability below δ.

use gibbs_anneal::annealer::{boosted_run_count, estimate_ratio_boosted, AnnealConfig, SamplingMode};
use gibbs_anneal::oracle::HistogramBackend;
use gibbs_anneal::{HamiltonianHistogram, InverseTemperature};

fn main() -> gibbs_anneal::Result<()> {
    let hist = HamiltonianHistogram::new(vec![1, 3, 1])?;
    let exact = hist.log_z(InverseTemperature::INFINITY)? - hist.log_z(InverseTemperature::ZERO)?;
    let backend = HistogramBackend::new(hist.clone());
    let (eps, delta) = (0.1, 0.05);
    println!("{} runs per boosted estimate", boosted_run_count(delta));

    let trials = 20;
    let mut hits = 0;
    for seed in 0..trials {
        let config = AnnealConfig::new(InverseTemperature::ZERO, InverseTemperature::INFINITY, eps, hist.q(), 2)
            .with_mode(SamplingMode::Lazy)
            .with_seed(seed)
            .with_boost(Some(delta));
        hits += estimate_ratio_boosted(&config, &backend)?.within(exact, eps) as u32;
    }
    println!("{hits}/{trials} boosted estimates within ±{eps}");
    Ok(())
}
