//! Run the plain product estimator and the paired estimator on the same
//! schedule, sharing one oracle round.

use gibbs_anneal::estimators::{kappa_diagnostics, run_plans, EstimatorPlan};
use gibbs_anneal::oracle::oracle_from_histogram;
use gibbs_anneal::schedule::{build_schedule, ScheduleParameters};
use gibbs_anneal::HamiltonianHistogram;

fn main() -> gibbs_anneal::Result<()> {
    let hist = HamiltonianHistogram::new(vec![2, 10, 30, 80, 200])?;
    let schedule = build_schedule(&ScheduleParameters::new(hist.q(), 4)?);
    let betas = schedule.betas().to_vec();
    let l = betas.len();
    let exact = hist.log_z(betas[l - 1])? - hist.log_z(betas[0])?;

    let all: Vec<usize> = (0..l).collect();
    let plans = [EstimatorPlan::product(all.clone(), 20_000)?, EstimatorPlan::paired(all, 20_000)?];
    let oracle = oracle_from_histogram(hist.clone(), betas.clone(), 3);
    let logs = run_plans(&oracle, &plans)?;

    println!("schedule length {l}, exact ln Q {exact:.4}");
    println!("product estimate {:.4}", logs[0]);
    println!("paired estimate  {:.4}", logs[1]);
    println!("samples {} in {} round(s)", oracle.total_samples(), oracle.oracle_rounds());

    let kappa = kappa_diagnostics(&betas, &hist)?;
    println!("kappa total {:.4}, product relative variance {:.4}", kappa.total, kappa.product_srel);
    Ok(())
}
