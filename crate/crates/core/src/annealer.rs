//! End-to-end annealing: schedule, split search, and the branch between
//! product and paired-product estimation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beta::InverseTemperature;
use crate::error::{Error, Result};
use crate::estimate::{CostMetrics, RatioEstimate};
use crate::estimators::{run_plans, EstimatorPlan};
use crate::noisyfind::{noisy_find, noisy_find_precomputed, precompute_batches, NoisyFindConfig};
use crate::oracle::{OracleRequest, SampleBackend, SampleStore, SamplingOracle};
use crate::reduce::ceil_log2;
use crate::rng::Phase;
use crate::schedule::{build_schedule, truncate_schedule, CoolingSchedule, ScheduleParameters};

/// How oracle rounds are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Everything any branch could need, drawn in a single round.
    #[default]
    Eager,
    /// One round per search probe, then one for the chosen estimators.
    Lazy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealConfig {
    pub beta_min: InverseTemperature,
    pub beta_max: InverseTemperature,
    pub eps: f64,
    /// Upper bound on `ln|Ω|`.
    pub q_bar: f64,
    /// Upper bound on the Hamiltonian.
    pub h: u64,
    pub mode: SamplingMode,
    pub seed: u64,
    pub boost_delta: Option<f64>,
}

impl AnnealConfig {
    pub fn new(beta_min: InverseTemperature, beta_max: InverseTemperature, eps: f64, q_bar: f64, h: u64) -> Self {
        Self { beta_min, beta_max, eps, q_bar, h, mode: SamplingMode::Eager, seed: 0, boost_delta: None }
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_boost(mut self, boost_delta: Option<f64>) -> Self {
        self.boost_delta = boost_delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta_min >= self.beta_max {
            return Err(Error::InvalidRange { min: self.beta_min.to_string(), max: self.beta_max.to_string() });
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if let Some(d) = self.boost_delta {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::InvalidParameter(format!("boost delta must lie in (0, 1), got {d}")));
            }
        }
        ScheduleParameters::new(self.q_bar, self.h)?;
        Ok(())
    }

    /// The truncated schedule the run anneals along.
    pub fn schedule(&self) -> Result<CoolingSchedule> {
        let params = ScheduleParameters::new(self.q_bar, self.h)?;
        truncate_schedule(&build_schedule(&params), self.beta_min, self.beta_max)
    }
}

/// Replicate counts for each branch at accuracy `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReplicateCounts {
    /// Two-point product when nothing is excited: `⌈320 ε⁻²⌉`.
    pub cold_product: usize,
    /// Paired product over the whole schedule: `⌈720 ε⁻²⌉`.
    pub hot_paired: usize,
    /// Paired half of a split run: `⌈12960 ε⁻²⌉`.
    pub split_paired: usize,
    /// Product half of a split run: `⌈4320 ε⁻²⌉`.
    pub split_product: usize,
}

impl ReplicateCounts {
    pub fn for_eps(eps: f64) -> Self {
        let r = |c: f64| (c / (eps * eps)).ceil() as usize;
        Self { cold_product: r(320.0), hot_paired: r(720.0), split_paired: r(12960.0), split_product: r(4320.0) }
    }
}

/// Which estimator combination a run used, given the split index `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Branch {
    /// `h = 0`: the ratio is exactly 1.
    Trivial,
    /// `j = 0`: two-point product over `(β_1, β_L)`.
    ColdProduct,
    /// `j = L`: paired product over the whole schedule.
    HotPaired,
    /// Paired product on `β_1..β_j` times product on `(β_j, β_{j+1}, β_L)`.
    Split { j: usize },
}

/// The estimator plans for split index `j` on a schedule of length `l`.
pub fn branch_plans(j: usize, l: usize, counts: &ReplicateCounts) -> Result<(Branch, Vec<EstimatorPlan>)> {
    if j == 0 {
        Ok((Branch::ColdProduct, vec![EstimatorPlan::product(vec![0, l - 1], counts.cold_product)?]))
    } else if j == l {
        Ok((Branch::HotPaired, vec![EstimatorPlan::paired((0..l).collect(), counts.hot_paired)?]))
    } else {
        let mut tail = vec![j - 1, j, l - 1];
        tail.dedup();
        Ok((
            Branch::Split { j },
            vec![
                EstimatorPlan::paired((0..j).collect(), counts.split_paired)?,
                EstimatorPlan::product(tail, counts.split_product)?,
            ],
        ))
    }
}

fn combined_depth(plans: &[EstimatorPlan]) -> u32 {
    let deepest = plans.iter().map(EstimatorPlan::reduction_depth).max().unwrap_or(0);
    deepest + (plans.len() > 1) as u32
}

/// The single eager round for a schedule of length `l`.
pub fn eager_requests(l: usize, eps: f64, search: &NoisyFindConfig) -> Vec<OracleRequest> {
    let counts = ReplicateCounts::for_eps(eps);
    let mut requests = precompute_batches(l, search);
    for t in 0..l - 1 {
        requests.push(OracleRequest::new(Phase::PairedLow, t, 0, counts.split_paired));
        requests.push(OracleRequest::new(Phase::PairedHigh, t + 1, 0, counts.split_paired));
        requests.push(OracleRequest::new(Phase::Product, t, 0, counts.split_product));
    }
    requests
}

/// The one-round plan of an eager run.
#[derive(Debug, Clone)]
pub struct RoundPlan {
    pub schedule: CoolingSchedule,
    pub requests: Vec<OracleRequest>,
}

impl RoundPlan {
    pub fn total_samples(&self) -> u64 {
        self.requests.iter().map(|r| r.count as u64).sum()
    }
}

pub fn one_round_plan(config: &AnnealConfig) -> Result<RoundPlan> {
    config.validate()?;
    let schedule = config.schedule()?;
    let requests = eager_requests(schedule.len(), config.eps, &NoisyFindConfig::default());
    Ok(RoundPlan { schedule, requests })
}

/// A finished single run with its diagnostics.
#[derive(Debug, Clone)]
pub struct AnnealRun {
    pub estimate: RatioEstimate,
    pub schedule: Option<CoolingSchedule>,
    pub branch: Branch,
}

/// One run of the annealer, drawing from streams labelled `run`.
pub fn anneal<B: SampleBackend>(config: &AnnealConfig, backend: &B, run: u32) -> Result<AnnealRun> {
    config.validate()?;
    if config.h == 0 {
        return Ok(AnnealRun {
            estimate: RatioEstimate { log_q_hat: 0.0, metrics: CostMetrics::default() },
            schedule: None,
            branch: Branch::Trivial,
        });
    }
    let schedule = config.schedule()?;
    let l = schedule.len();
    let oracle = SamplingOracle::with_run(backend, schedule.betas().to_vec(), config.seed, run);
    let search = NoisyFindConfig::default();
    let counts = ReplicateCounts::for_eps(config.eps);

    let (outcome, branch, plans, logs) = match config.mode {
        SamplingMode::Eager => {
            let requests = eager_requests(l, config.eps, &search);
            let mut store = SampleStore::new();
            store.insert_round(&requests, oracle.request_round(&requests)?);
            let outcome = noisy_find_precomputed(l, &search, &store)?;
            let (branch, plans) = branch_plans(outcome.index, l, &counts)?;
            let logs = plans
                .iter()
                .map(|p| p.evaluate(oracle.temperatures(), &store))
                .collect::<Result<Vec<_>>>()?;
            (outcome, branch, plans, logs)
        }
        SamplingMode::Lazy => {
            let outcome = noisy_find(&oracle, &search)?;
            let (branch, plans) = branch_plans(outcome.index, l, &counts)?;
            let logs = run_plans(&oracle, &plans)?;
            (outcome, branch, plans, logs)
        }
    };

    let metrics = CostMetrics {
        total_samples: oracle.total_samples(),
        oracle_rounds: oracle.oracle_rounds(),
        reduction_depth: combined_depth(&plans),
        schedule_length: l,
        search_depth: outcome.search_depth,
    };
    Ok(AnnealRun {
        estimate: RatioEstimate { log_q_hat: logs.iter().sum(), metrics },
        schedule: Some(schedule),
        branch,
    })
}

/// `ln Q̂` for `Q = Z(β_max)/Z(β_min)`, accurate to `1 ± ε` with
/// probability at least 3/4 given exact samples. Boosted when
/// `config.boost_delta` is set.
pub fn estimate_ratio<B: SampleBackend>(config: &AnnealConfig, backend: &B) -> Result<RatioEstimate> {
    if config.boost_delta.is_some() {
        return estimate_ratio_boosted(config, backend);
    }
    Ok(anneal(config, backend, 0)?.estimate)
}

/// Independent runs used by the median trick: `2⌈ln(1/δ)⌉ + 1`.
pub fn boosted_run_count(boost_delta: f64) -> usize {
    2 * (1.0 / boost_delta).ln().ceil() as usize + 1
}

/// Depth of a bitonic sorting network on `m` inputs.
fn median_depth(m: usize) -> u32 {
    let k = ceil_log2(m as u64);
    k * (k + 1) / 2
}

/// Median of `ln Q̂` over independent runs with disjoint stream keys.
pub fn estimate_ratio_boosted<B: SampleBackend>(config: &AnnealConfig, backend: &B) -> Result<RatioEstimate> {
    let delta = config
        .boost_delta
        .ok_or_else(|| Error::InvalidParameter("boosting needs a boost delta".into()))?;
    config.validate()?;
    let m = boosted_run_count(delta);
    let runs = (1..=m as u32)
        .into_par_iter()
        .map(|run| anneal(config, backend, run).map(|r| r.estimate))
        .collect::<Result<Vec<_>>>()?;
    let mut logs: Vec<f64> = runs.iter().map(|r| r.log_q_hat).collect();
    logs.sort_by(f64::total_cmp);
    let metrics = CostMetrics {
        total_samples: runs.iter().map(|r| r.metrics.total_samples).sum(),
        oracle_rounds: runs.iter().map(|r| r.metrics.oracle_rounds).max().unwrap_or(0),
        reduction_depth: runs.iter().map(|r| r.metrics.reduction_depth).max().unwrap_or(0) + median_depth(m),
        schedule_length: runs[0].metrics.schedule_length,
        search_depth: runs.iter().map(|r| r.metrics.search_depth).max().unwrap_or(0),
    };
    Ok(RatioEstimate { log_q_hat: logs[m / 2], metrics })
}
