//! Product and paired-product estimators of `Z(β_last) / Z(β_first)`.
//!
//! Both estimators read their samples from a [`SampleStore`], so the same
//! code serves a dedicated oracle round and a prefix of a larger
//! precomputed one. Replicates `0..r` of the relevant `(phase,
//! temperature)` batches are used.

use serde::Serialize;

use crate::beta::InverseTemperature;
use crate::error::{Error, Result};
use crate::estimate::{CostMetrics, RatioEstimate};
use crate::histogram::HamiltonianHistogram;
use crate::logspace::log_add_exp;
use crate::oracle::{OracleRequest, SampleBackend, SampleStore, SamplingOracle};
use crate::reduce::{tree_depth, tree_reduce, tree_sum};
use crate::rng::Phase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Product,
    PairedProduct,
}

/// An estimator over a sub-schedule of the oracle's temperature table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimatorPlan {
    pub kind: EstimatorKind,
    /// Indices into the oracle's temperature table, in increasing `β`.
    pub temperatures: Vec<usize>,
    pub replicates: usize,
}

/// `ln` of a weight `exp(a·H)`, with `exp(a·0) = 1` even when `a` is infinite.
#[inline]
fn log_weight(a: f64, h: u32) -> f64 {
    if h == 0 {
        0.0
    } else {
        a * h as f64
    }
}

fn exponents(betas: &[InverseTemperature], temps: &[usize], scale: f64) -> Vec<f64> {
    temps
        .windows(2)
        .map(|w| {
            let (lo, hi) = (betas[w[0]], betas[w[1]]);
            if lo == hi {
                0.0
            } else {
                scale * (lo.value() - hi.value())
            }
        })
        .collect()
}

impl EstimatorPlan {
    fn new(kind: EstimatorKind, temperatures: Vec<usize>, replicates: usize) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::InvalidParameter("estimator needs r >= 1 replicates".into()));
        }
        if temperatures.is_empty() {
            return Err(Error::InvalidParameter("estimator needs at least one temperature".into()));
        }
        Ok(Self { kind, temperatures, replicates })
    }

    pub fn product(temperatures: Vec<usize>, replicates: usize) -> Result<Self> {
        Self::new(EstimatorKind::Product, temperatures, replicates)
    }

    pub fn paired(temperatures: Vec<usize>, replicates: usize) -> Result<Self> {
        Self::new(EstimatorKind::PairedProduct, temperatures, replicates)
    }

    /// Number of adjacent-temperature factors.
    pub fn factors(&self) -> usize {
        self.temperatures.len() - 1
    }

    /// Samples this plan consumes from one round.
    pub fn requests(&self) -> Vec<OracleRequest> {
        let l = self.temperatures.len();
        let r = self.replicates;
        match self.kind {
            EstimatorKind::Product => self.temperatures[..l - 1]
                .iter()
                .map(|&t| OracleRequest::new(Phase::Product, t, 0, r))
                .collect(),
            EstimatorKind::PairedProduct => self.temperatures[..l - 1]
                .iter()
                .map(|&t| OracleRequest::new(Phase::PairedLow, t, 0, r))
                .chain(self.temperatures[1..].iter().map(|&t| OracleRequest::new(Phase::PairedHigh, t, 0, r)))
                .collect(),
        }
    }

    pub fn sample_count(&self) -> u64 {
        self.requests().iter().map(|r| r.count as u64).sum()
    }

    /// Depth of the combine tree: per-factor means then the product for PE;
    /// per-replicate products, the two means and their ratio for PPE.
    pub fn reduction_depth(&self) -> u32 {
        let f = self.factors();
        if f == 0 {
            return 0;
        }
        let base = tree_depth(self.replicates) + tree_depth(f);
        match self.kind {
            EstimatorKind::Product => base,
            EstimatorKind::PairedProduct => base + 1,
        }
    }

    fn batch<'a>(&self, store: &'a SampleStore, phase: Phase, t: usize) -> Result<&'a [u32]> {
        store.slice(phase, t, 0, self.replicates).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "missing {} {phase:?} samples at temperature index {t}",
                self.replicates
            ))
        })
    }

    /// `ln Q̂` from samples already in `store`; `betas` is the oracle's
    /// temperature table.
    pub fn evaluate(&self, betas: &[InverseTemperature], store: &SampleStore) -> Result<f64> {
        for &t in &self.temperatures {
            if t >= betas.len() {
                return Err(Error::TemperatureIndex { index: t, len: betas.len() });
            }
        }
        if self.temperatures.windows(2).any(|w| betas[w[0]] > betas[w[1]]) {
            return Err(Error::InvalidParameter("estimator temperatures must be non-decreasing".into()));
        }
        if self.factors() == 0 {
            return Ok(0.0);
        }
        match self.kind {
            EstimatorKind::Product => self.evaluate_product(betas, store),
            EstimatorKind::PairedProduct => self.evaluate_paired(betas, store),
        }
    }

    fn evaluate_product(&self, betas: &[InverseTemperature], store: &SampleStore) -> Result<f64> {
        let a = exponents(betas, &self.temperatures, 1.0);
        let r = self.replicates;
        let mut log_means = Vec::with_capacity(a.len());
        for (i, &ai) in a.iter().enumerate() {
            let h = self.batch(store, Phase::Product, self.temperatures[i])?;
            let top = h.iter().copied().max().unwrap_or(0) as usize;
            let table: Vec<f64> = (0..=top as u32).map(|k| log_weight(ai, k).exp()).collect();
            let mean = tree_sum(r, &|j| table[h[j] as usize]) / r as f64;
            if mean == 0.0 {
                return Err(Error::VanishingEstimate { factor: i + 1 });
            }
            log_means.push(mean.ln());
        }
        Ok(tree_sum(log_means.len(), &|i| log_means[i]))
    }

    fn evaluate_paired(&self, betas: &[InverseTemperature], store: &SampleStore) -> Result<f64> {
        let l = self.temperatures.len();
        let down = exponents(betas, &self.temperatures, 0.5);
        let up: Vec<f64> = down.iter().map(|a| -a).collect();
        let x: Vec<&[u32]> = (0..l - 1)
            .map(|i| self.batch(store, Phase::PairedLow, self.temperatures[i]))
            .collect::<Result<_>>()?;
        let y: Vec<&[u32]> = (1..l)
            .map(|i| self.batch(store, Phase::PairedHigh, self.temperatures[i]))
            .collect::<Result<_>>()?;

        let side = |a: &[f64], h: &[&[u32]]| {
            tree_reduce(
                self.replicates,
                &|j| tree_sum(l - 1, &|i| log_weight(a[i], h[i][j])),
                &log_add_exp,
            )
            .expect("r >= 1")
        };
        let log_w = side(&down, &x);
        let log_v = side(&up, &y);
        if log_w == f64::NEG_INFINITY {
            return Err(Error::VanishingEstimate { factor: 0 });
        }
        // The 1/r normalizations of W and V cancel.
        Ok(log_w - log_v)
    }
}

/// Evaluates every plan on one shared oracle round.
pub fn run_plans<B: SampleBackend>(oracle: &SamplingOracle<B>, plans: &[EstimatorPlan]) -> Result<Vec<f64>> {
    let requests: Vec<OracleRequest> = plans.iter().flat_map(EstimatorPlan::requests).collect();
    let results = oracle.request_round(&requests)?;
    let mut store = SampleStore::new();
    store.insert_round(&requests, results);
    plans.iter().map(|p| p.evaluate(oracle.temperatures(), &store)).collect()
}

fn standalone<B: SampleBackend>(plan: &EstimatorPlan, oracle: &SamplingOracle<B>) -> Result<RatioEstimate> {
    let (samples, rounds) = (oracle.total_samples(), oracle.oracle_rounds());
    let log_q_hat = run_plans(oracle, std::slice::from_ref(plan))?[0];
    Ok(RatioEstimate {
        log_q_hat,
        metrics: CostMetrics {
            total_samples: oracle.total_samples() - samples,
            oracle_rounds: oracle.oracle_rounds() - rounds,
            reduction_depth: plan.reduction_depth(),
            schedule_length: plan.temperatures.len(),
            search_depth: 0,
        },
    })
}

/// Product estimator in one oracle round.
pub fn pe_estimate<B: SampleBackend>(plan: &EstimatorPlan, oracle: &SamplingOracle<B>) -> Result<RatioEstimate> {
    if plan.kind != EstimatorKind::Product {
        return Err(Error::InvalidParameter("pe_estimate needs a product plan".into()));
    }
    standalone(plan, oracle)
}

/// Paired product estimator in one oracle round.
pub fn ppe_estimate<B: SampleBackend>(plan: &EstimatorPlan, oracle: &SamplingOracle<B>) -> Result<RatioEstimate> {
    if plan.kind != EstimatorKind::PairedProduct {
        return Err(Error::InvalidParameter("ppe_estimate needs a paired plan".into()));
    }
    if plan
        .temperatures
        .windows(2)
        .any(|w| oracle.temperatures()[w[0]] >= oracle.temperatures()[w[1]])
    {
        return Err(Error::InvalidParameter("paired estimator needs strictly increasing temperatures".into()));
    }
    standalone(plan, oracle)
}

/// Exact variance bookkeeping for the paired estimator on a schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaDiagnostics {
    /// `z(β_i) + z(β_{i+1}) − 2 z((β_i + β_{i+1})/2)` per adjacent pair.
    pub per_step: Vec<f64>,
    pub total: f64,
    /// Predicted relative second moment of each one-step paired weight.
    pub step_srel: Vec<f64>,
    /// Predicted relative second moment of one replicate's full product.
    pub product_srel: f64,
}

pub fn kappa_diagnostics(betas: &[InverseTemperature], hist: &HamiltonianHistogram) -> Result<KappaDiagnostics> {
    let mut per_step = Vec::with_capacity(betas.len().saturating_sub(1));
    for w in betas.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo == hi {
            per_step.push(0.0);
            continue;
        }
        let mid = InverseTemperature::new(0.5 * (lo.value() + hi.value()))?;
        let k = if hi.is_infinite() {
            // z(+∞) appears on both sides once the midpoint is also +∞.
            hist.log_z(lo)? - hist.log_z(hi)?
        } else {
            hist.log_z(lo)? + hist.log_z(hi)? - 2.0 * hist.log_z(mid)?
        };
        per_step.push(k.max(0.0));
    }
    let total = per_step.iter().sum();
    Ok(KappaDiagnostics {
        step_srel: per_step.iter().map(|k| k.exp()).collect(),
        product_srel: f64::exp(total),
        per_step,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_from_histogram;
    use crate::schedule::{build_schedule, ScheduleParameters};

    fn beta(v: f64) -> InverseTemperature {
        InverseTemperature::new(v).unwrap()
    }

    fn hist(c: &[u64]) -> HamiltonianHistogram {
        HamiltonianHistogram::new(c.to_vec()).unwrap()
    }

    #[test]
    fn equal_temperatures_give_one() {
        let o = oracle_from_histogram(hist(&[1, 2, 3]), vec![beta(0.4), beta(0.4)], 1);
        let plan = EstimatorPlan::product(vec![0, 1], 100).unwrap();
        assert_eq!(pe_estimate(&plan, &o).unwrap().log_q_hat, 0.0);
        let paired = EstimatorPlan::paired(vec![0, 1], 100).unwrap();
        assert!(ppe_estimate(&paired, &o).is_err());
    }

    #[test]
    fn constant_hamiltonian_gives_one() {
        let temps = vec![beta(0.0), beta(1.0), beta(3.0), InverseTemperature::INFINITY];
        let o = oracle_from_histogram(hist(&[5]), temps, 2);
        let pe = pe_estimate(&EstimatorPlan::product(vec![0, 1, 2, 3], 50).unwrap(), &o).unwrap();
        let ppe = ppe_estimate(&EstimatorPlan::paired(vec![0, 1, 2, 3], 50).unwrap(), &o).unwrap();
        assert_eq!(pe.log_q_hat, 0.0);
        assert_eq!(ppe.log_q_hat, 0.0);
    }

    #[test]
    fn single_temperature_paired_is_one() {
        let o = oracle_from_histogram(hist(&[1, 1]), vec![beta(0.5)], 3);
        let est = ppe_estimate(&EstimatorPlan::paired(vec![0], 10).unwrap(), &o).unwrap();
        assert_eq!(est.log_q_hat, 0.0);
        assert_eq!(est.metrics.total_samples, 0);
        assert_eq!(est.metrics.oracle_rounds, 0);
    }

    #[test]
    fn rejects_zero_replicates() {
        assert!(EstimatorPlan::product(vec![0, 1], 0).is_err());
        assert!(EstimatorPlan::paired(vec![0, 1], 0).is_err());
        assert!(EstimatorPlan::paired(vec![], 1).is_err());
    }

    #[test]
    fn two_level_product_concentrates() {
        let h = hist(&[1, 0, 1]);
        let mut inside = 0;
        for seed in 0..100 {
            let o = oracle_from_histogram(h.clone(), vec![beta(0.0), InverseTemperature::INFINITY], seed);
            let est = pe_estimate(&EstimatorPlan::product(vec![0, 1], 100_000).unwrap(), &o).unwrap();
            assert_eq!(est.metrics.oracle_rounds, 1);
            assert_eq!(est.metrics.total_samples, 100_000);
            if (0.45..=0.55).contains(&est.q_hat()) {
                inside += 1;
            }
        }
        assert!(inside >= 99, "{inside}/100");
    }

    #[test]
    fn paired_on_refined_schedule_concentrates() {
        let h = hist(&[1, 0, 1]);
        let params = ScheduleParameters::new(2f64.ln(), 2).unwrap();
        let schedule = build_schedule(&params);
        let l = schedule.len();
        let mut inside = 0;
        for seed in 0..100 {
            let o = oracle_from_histogram(h.clone(), schedule.betas().to_vec(), seed);
            let est = ppe_estimate(&EstimatorPlan::paired((0..l).collect(), 100_000).unwrap(), &o).unwrap();
            assert_eq!(est.metrics.total_samples, 2 * (l as u64 - 1) * 100_000);
            if (est.q_hat() - 0.5).abs() <= 0.05 * 0.5 {
                inside += 1;
            }
        }
        assert!(inside >= 99, "{inside}/100");
    }

    #[test]
    fn vanishing_product_is_an_error() {
        // H = 2 almost surely, so every weight toward +inf is zero.
        let h = hist(&[1, 0, 1_000_000_000]);
        let o = oracle_from_histogram(h, vec![beta(0.0), InverseTemperature::INFINITY], 9);
        match pe_estimate(&EstimatorPlan::product(vec![0, 1], 3).unwrap(), &o) {
            Err(Error::VanishingEstimate { factor: 1 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn depth_accounting() {
        let pe = EstimatorPlan::product(vec![0, 1, 2], 4320).unwrap();
        assert_eq!(pe.reduction_depth(), 13 + 1);
        let ppe = EstimatorPlan::paired((0..9).collect(), 1000).unwrap();
        assert_eq!(ppe.reduction_depth(), 10 + 3 + 1);
        assert_eq!(EstimatorPlan::paired(vec![3], 1000).unwrap().reduction_depth(), 0);
    }

    #[test]
    fn request_layout() {
        let ppe = EstimatorPlan::paired(vec![2, 3, 4], 7).unwrap();
        let req = ppe.requests();
        assert_eq!(req.len(), 4);
        assert_eq!(req[0], OracleRequest::new(Phase::PairedLow, 2, 0, 7));
        assert_eq!(req[3], OracleRequest::new(Phase::PairedHigh, 4, 0, 7));
        assert_eq!(ppe.sample_count(), 28);
    }

    #[test]
    fn worker_count_does_not_change_estimates() {
        let h = hist(&[2, 7, 1, 8, 2, 8]);
        let temps = vec![beta(0.0), beta(0.3), beta(0.9), beta(2.0)];
        let run = |workers: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
            pool.install(|| {
                let o = oracle_from_histogram(h.clone(), temps.clone(), 42);
                let pe = pe_estimate(&EstimatorPlan::product(vec![0, 1, 2, 3], 50_000).unwrap(), &o).unwrap();
                let ppe = ppe_estimate(&EstimatorPlan::paired(vec![0, 1, 2, 3], 50_000).unwrap(), &o).unwrap();
                (pe.log_q_hat.to_bits(), ppe.log_q_hat.to_bits())
            })
        };
        let one = run(1);
        assert_eq!(run(4), one);
        assert_eq!(run(16), one);
    }

    #[test]
    fn kappa_closed_form() {
        let h = hist(&[1, 0, 1]);
        let z = |b: f64| (1.0 + (-2.0 * b).exp()).ln();
        let k = kappa_diagnostics(&[beta(0.0), beta(1.0)], &h).unwrap();
        let expected = z(0.0) + z(1.0) - 2.0 * z(0.5);
        assert!((k.per_step[0] - expected).abs() < 1e-14);
        assert!((k.step_srel[0] - expected.exp()).abs() < 1e-14);
        let flat = kappa_diagnostics(&[beta(0.7), beta(0.7)], &h).unwrap();
        assert_eq!(flat.total, 0.0);
        assert_eq!(flat.product_srel, 1.0);
    }
}
