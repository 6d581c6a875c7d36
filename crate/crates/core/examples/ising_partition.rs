//! Ising partition functions (ferromagnetic and antiferromagnetic) via the
//! exact Hamiltonian sampler.

use gibbs_anneal::annealer::{anneal, AnnealConfig};
use gibbs_anneal::models::{enumerate_histogram, enumerate_partition_function, reduce_model, Graph, GraphModel};
use gibbs_anneal::oracle::HistogramBackend;

fn main() -> gibbs_anneal::Result<()> {
    let graph = Graph::new(5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)])?;
    for gamma in [2.0, 0.5] {
        let model = GraphModel::ising(graph.clone(), gamma)?;
        let red = reduce_model(&model)?;
        let config = AnnealConfig::new(red.beta_min, red.beta_max, 0.1, 5.0 * std::f64::consts::LN_2, red.h as u64);
        let run = anneal(&config, &HistogramBackend::new(enumerate_histogram(&model)?), 0)?;
        let z = red.log_z_model(run.estimate.log_q_hat).exp();
        println!(
            "gamma {gamma}: {:?}, Z estimate {z:.3}, exact {:.3}",
            model.hamiltonian_kind(),
            enumerate_partition_function(&model)?
        );
    }
    Ok(())
}
