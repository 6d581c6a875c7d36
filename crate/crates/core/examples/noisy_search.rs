//! Locate where Pr[H >= 1] crosses one half along a schedule using noisy
//! threshold probes.

use gibbs_anneal::noisyfind::{noisy_find, NoisyFindConfig};
use gibbs_anneal::oracle::{FixedProbabilityBackend, SamplingOracle};
use gibbs_anneal::InverseTemperature;

fn main() -> gibbs_anneal::Result<()> {
    let excitation = vec![0.99, 0.95, 0.9, 0.8, 0.7, 0.6, 0.4, 0.3, 0.1, 0.05];
    let temps = (0..excitation.len()).map(|i| InverseTemperature::new(i as f64)).collect::<Result<Vec<_>, _>>()?;
    let config = NoisyFindConfig::default();
    let oracle = SamplingOracle::new(FixedProbabilityBackend::new(excitation.clone())?, temps, 11);

    let outcome = noisy_find(&oracle, &config)?;
    println!("probe size {} x {} probes", config.probe_size(excitation.len()), config.probes(excitation.len()));
    for (t, high) in &outcome.probes {
        println!("  probe t={t:<2} p={:.2} judged {}", excitation[*t], if *high { "high" } else { "low" });
    }
    println!("split index {}", outcome.index);
    Ok(())
}
