//! Count weighted independent sets on a small graph with Glauber dynamics
//! as the sampler, and check against exhaustive enumeration.

use gibbs_anneal::annealer::{anneal, AnnealConfig, SamplingMode};
use gibbs_anneal::models::{enumerate_partition_function, reduce_model, Graph, GraphModel, ModelBackend};

fn main() -> gibbs_anneal::Result<()> {
    let graph = Graph::cycle(5)?;
    let model = GraphModel::hard_core(graph, 0.7)?;
    let red = reduce_model(&model)?;
    let n = model.graph().vertex_count() as f64;

    // Every sample costs a full burn-in, so keep ε coarse and sample lazily.
    let eps = 0.5;
    let config = AnnealConfig::new(red.beta_min, red.beta_max, eps, n * std::f64::consts::LN_2, red.h as u64).with_seed(5)
        .with_mode(SamplingMode::Lazy);
    let backend = ModelBackend::new(model.clone(), None);
    println!("burn-in {} steps per sample", backend.burn_in());
    let run = anneal(&config, &backend, 0)?;

    let estimate = red.log_z_model(run.estimate.log_q_hat).exp();
    let exact = enumerate_partition_function(&model)?;
    println!("Z estimate {estimate:.4}, exact {exact:.4}, ratio {:.4}", estimate / exact);
    println!("samples {}", run.estimate.metrics.total_samples);
    Ok(())
}
