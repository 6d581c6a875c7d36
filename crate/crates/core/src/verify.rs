//! Self-check battery behind `gibbs-anneal verify`.
//!
//! Each suite draws its cases from a seeded generator, checks one family of
//! invariants against exact histogram arithmetic, and reports how many
//! cases failed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::annealer::{estimate_ratio, AnnealConfig, SamplingMode};
use crate::beta::InverseTemperature;
use crate::error::Result;
use crate::estimators::kappa_diagnostics;
use crate::histogram::HamiltonianHistogram;
use crate::logspace::log_sum_exp;
use crate::models::{enumerate_histogram, site_conditional, Graph, GraphModel, ModelBackend};
use crate::noisyfind::{noisy_find, NoisyFindConfig};
use crate::oracle::{oracle_from_histogram, OracleRequest, SamplingOracle};
use crate::rng::Phase;
use crate::schedule::{build_schedule, clamped_log, truncate_schedule, ScheduleParameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Schedule,
    Moments,
    Derivative,
    Kappa,
    Noisyfind,
    Endtoend,
    Glauber,
    Determinism,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Schedule,
        Suite::Moments,
        Suite::Derivative,
        Suite::Kappa,
        Suite::Noisyfind,
        Suite::Endtoend,
        Suite::Glauber,
        Suite::Determinism,
    ];

    fn default_trials(self) -> usize {
        match self {
            Suite::Schedule | Suite::Kappa => 100,
            Suite::Moments | Suite::Noisyfind => 1000,
            Suite::Derivative => 10_000,
            Suite::Endtoend => 200,
            Suite::Glauber => 4,
            Suite::Determinism => 20,
            Suite::All => 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub cases: usize,
    pub failures: usize,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn counted(suite: Suite, cases: usize, failures: usize, allowed: usize, notes: Vec<String>) -> Self {
        Self { suite, passed: failures <= allowed, cases, failures, notes }
    }
}

/// A random histogram with `h ∈ [2, 64]`, `c_0 ≥ 1` and total count at
/// most `10⁶`.
pub fn random_histogram<R: Rng>(rng: &mut R) -> HamiltonianHistogram {
    let h = rng.random_range(2..=64usize);
    let cap = 1_000_000 / (h as u64 + 1);
    let density = rng.random_range(0.2..1.0);
    let counts: Vec<u64> = (0..=h)
        .map(|i| match i {
            0 => rng.random_range(1..=cap.min(1000)),
            _ if i == h || rng.random_bool(density) => rng.random_range(0..=cap),
            _ => 0,
        })
        .collect();
    HamiltonianHistogram::new(counts).expect("c_0 >= 1")
}

fn beta(v: f64) -> InverseTemperature {
    InverseTemperature::new(v).expect("non-negative")
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `ln E_{β}[e^{a H}]` by direct summation over the histogram.
fn log_weight_moment(hist: &HamiltonianHistogram, b: InverseTemperature, a: f64) -> Result<f64> {
    let p = hist.probabilities(b)?;
    let terms: Vec<f64> = p.iter().enumerate().map(|(i, pi)| pi.ln() + a * i as f64).collect();
    Ok(log_sum_exp(&terms))
}

fn schedule_suite(trials: usize, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut failures = 0;
    let mut notes = Vec::new();
    for case in 0..trials {
        let hist = random_histogram(rng);
        let q_bar = rng.random_range(hist.q()..=14f64.max(hist.q()));
        let params = ScheduleParameters::new(q_bar, hist.max_hamiltonian() as u64)?;
        let schedule = build_schedule(&params);
        let z: Vec<f64> = schedule.betas().iter().map(|&b| hist.log_z(b)).collect::<Result<_>>()?;
        let limit = 1.0 / clamped_log(hist.max_hamiltonian() as u64) + 1e-9;
        let last = z.len() - 2;
        let bad = (0..z.len() - 1).find(|&i| z[i] - z[i + 1] > if i == last { 2.0 + 1e-9 } else { limit });
        let too_long = schedule.len() as f64 > params.length_bound();
        if bad.is_some() || too_long {
            failures += 1;
            notes.push(format!("case {case}: step {bad:?}, length {}", schedule.len()));
        }
    }
    Ok(SuiteReport::counted(Suite::Schedule, trials, failures, 0, notes))
}

fn moments_suite(trials: usize, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut failures = 0;
    let mut notes = Vec::new();
    for case in 0..trials {
        let hist = random_histogram(rng);
        let lo = rng.random_range(0.0..3.0);
        let hi = lo + rng.random_range(1e-3..2.0);
        let (b0, b1) = (beta(lo), beta(hi));
        let a = lo - hi;
        let ratio = hist.log_z(b1)? - hist.log_z(b0)?;
        let mean = log_weight_moment(&hist, b0, a)?;
        let pe_srel = (log_weight_moment(&hist, b0, 2.0 * a)? - 2.0 * mean).exp();
        let kappa = kappa_diagnostics(&[b0, b1], &hist)?.per_step[0];
        let w = log_weight_moment(&hist, b0, a / 2.0)?;
        let w_srel = (log_weight_moment(&hist, b0, a)? - 2.0 * w).exp();
        let v = log_weight_moment(&hist, b1, -a / 2.0)?;
        let v_srel = (log_weight_moment(&hist, b1, -a)? - 2.0 * v).exp();
        let errs = [
            rel_err(mean.exp(), ratio.exp()),
            rel_err(pe_srel, hist.relative_second_moment(b0, b1)?),
            rel_err(w_srel, kappa.exp()),
            rel_err(v_srel, kappa.exp()),
        ];
        if errs.iter().any(|&e| e > 1e-10) {
            failures += 1;
            notes.push(format!("case {case}: relative errors {errs:?}"));
        }
    }
    Ok(SuiteReport::counted(Suite::Moments, trials, failures, 0, notes))
}

fn derivative_suite(trials: usize, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut failures = 0;
    let mut checked = 0;
    let mut notes = Vec::new();
    for case in 0..trials {
        let hist = random_histogram(rng);
        let lo = rng.random_range(0.0..4.0);
        let hi = lo + rng.random_range(1e-6..3.0);
        let (b1, b2) = (beta(lo), beta(hi));
        let (z1, z2) = (hist.log_z(b1)?, hist.log_z(b2)?);
        if z1 - z2 < 1e-12 {
            continue;
        }
        checked += 1;
        let mid = hist.log_z(beta(0.5 * (lo + hi)))?;
        let kappa = z1 + z2 - 2.0 * mid;
        let lhs = hist.log_z_derivative(b1)? / hist.log_z_derivative(b2)?;
        let rhs = (2.0 * kappa / (z1 - z2)).exp();
        if lhs < rhs - 1e-9 {
            failures += 1;
            notes.push(format!("case {case}: {lhs} < {rhs}"));
        }
    }
    Ok(SuiteReport::counted(Suite::Derivative, checked, failures, 0, notes))
}

fn kappa_suite(trials: usize, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let search = NoisyFindConfig::default();
    let bound = 0.5 + (1.0 / 0.25f64).ln() + 1e-9;
    let mut failures = 0;
    let mut worst = 0f64;
    for _ in 0..trials {
        let hist = random_histogram(rng);
        let params = ScheduleParameters::new(hist.q(), hist.max_hamiltonian() as u64)?;
        let b_min = beta(rng.random_range(0.0..0.5));
        let schedule = truncate_schedule(&build_schedule(&params), b_min, InverseTemperature::INFINITY)?;
        let p: Vec<f64> = schedule
            .betas()
            .iter()
            .map(|&b| hist.excitation_probability(b))
            .collect::<Result<_>>()?;
        // Split points whose bracket holds exactly: p_j ≥ τ − ε and p_{j+1} ≤ τ + ε.
        let valid: Vec<usize> = (1..p.len())
            .filter(|&j| p[j - 1] >= search.tau - search.slack && p[j] <= search.tau + search.slack)
            .collect();
        if valid.is_empty() {
            continue;
        }
        let j = valid[rng.random_range(0..valid.len())];
        let kappa = kappa_diagnostics(&schedule.betas()[..j], &hist)?.total;
        worst = worst.max(kappa);
        failures += (kappa > bound) as usize;
    }
    Ok(SuiteReport::counted(Suite::Kappa, trials, failures, 0, vec![format!("largest kappa {worst:.6} (bound {bound:.6})")]))
}

fn noisyfind_suite(trials: usize, rng: &mut ChaCha8Rng, seed: u64) -> Result<SuiteReport> {
    let config = NoisyFindConfig::default();
    let mut failures = 0;
    for trial in 0..trials {
        let hist = random_histogram(rng);
        let l = rng.random_range(1..=4096usize);
        let top = rng.random_range(0.5..20.0);
        let temps: Vec<InverseTemperature> = (0..l).map(|t| beta(top * t as f64 / l as f64)).collect();
        let p: Vec<f64> = temps.iter().map(|&b| hist.excitation_probability(b)).collect::<Result<_>>()?;
        let oracle = oracle_from_histogram(hist, temps, seed ^ trial as u64);
        let j = noisy_find(&oracle, &config)?.index;
        let ok_low = j == 0 || p[j - 1] >= config.tau - config.slack;
        let ok_high = j == l || p[j] <= config.tau + config.slack;
        failures += !(ok_low && ok_high) as usize;
    }
    let allowed = trials / 100;
    Ok(SuiteReport::counted(Suite::Noisyfind, trials, failures, allowed, vec![]))
}

/// Instances with exactly known partition functions.
pub fn benchmark_instances() -> Vec<(&'static str, GraphModel)> {
    let k2 = Graph::new(2, vec![(0, 1)]).expect("simple");
    vec![
        ("hardcore P3 lambda=0.5", GraphModel::hard_core(Graph::path(3), 0.5).expect("supported")),
        ("hardcore K2 lambda=0.5", GraphModel::hard_core(k2.clone(), 0.5).expect("supported")),
        ("ising K2 gamma=2", GraphModel::ising(k2, 2.0).expect("supported")),
        ("ising C4 gamma=2", GraphModel::ising(Graph::cycle(4).expect("n >= 3"), 2.0).expect("supported")),
    ]
}

/// Exact-oracle annealer config for a model, using the default `q̄ = n ln 2`.
pub fn model_config(model: &GraphModel, eps: f64) -> Result<(AnnealConfig, HamiltonianHistogram, f64)> {
    let red = crate::models::reduce_model(model)?;
    let hist = enumerate_histogram(model)?;
    let q_bar = model.graph().vertex_count() as f64 * std::f64::consts::LN_2;
    let log_q = hist.log_z(red.beta_max)? - hist.log_z(red.beta_min)?;
    let config = AnnealConfig::new(red.beta_min, red.beta_max, eps, q_bar, red.h as u64);
    Ok((config, hist, log_q))
}

fn endtoend_suite(trials: usize, seed: u64) -> Result<SuiteReport> {
    let eps = 0.1;
    let mut notes = Vec::new();
    let mut failures = 0;
    for (name, model) in benchmark_instances() {
        let (config, hist, log_q) = model_config(&model, eps)?;
        let backend = crate::oracle::HistogramBackend::new(hist);
        let mut hits = 0;
        for t in 0..trials as u64 {
            let run = config.with_mode(SamplingMode::Lazy).with_seed(seed.wrapping_add(t));
            hits += estimate_ratio(&run, &backend)?.within(log_q, eps) as usize;
        }
        let rate = hits as f64 / trials.max(1) as f64;
        if rate < 0.72 {
            failures += 1;
        }
        notes.push(format!("{name}: {hits}/{trials} within 1 ± {eps}"));
    }
    Ok(SuiteReport::counted(Suite::Endtoend, trials, failures, 0, notes))
}

fn glauber_suite(trials: usize, rng: &mut ChaCha8Rng, seed: u64) -> Result<SuiteReport> {
    let mut failures = 0;
    let mut notes = Vec::new();
    for case in 0..trials {
        let n = rng.random_range(3..=8usize);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.random_bool(0.4))
            .collect();
        let graph = Graph::new(n, edges)?;
        let models = [
            GraphModel::hard_core(graph.clone(), rng.random_range(0.1..1.0))?,
            GraphModel::ising(graph.clone(), rng.random_range(1.0..3.0))?,
            GraphModel::ising(graph, rng.random_range(0.3..1.0))?,
        ];
        for model in models {
            let b = beta(rng.random_range(0.0..2.0));
            let err = stationarity_error(&model, b);
            let tv = mcmc_total_variation(&model, b, 20_000, seed ^ case as u64)?;
            if err > 1e-10 || tv > 0.05 {
                failures += 1;
                notes.push(format!("case {case} {:?}: stationarity {err:e}, tv {tv:.4}", model.kind()));
            }
        }
    }
    Ok(SuiteReport::counted(Suite::Glauber, trials * 3, failures, 0, notes))
}

/// Largest entry of `|π_β P − π_β|` for the exact single-site heat-bath
/// kernel `P` over all feasible configurations.
pub fn stationarity_error(model: &GraphModel, b: InverseTemperature) -> f64 {
    let n = model.graph().vertex_count();
    let config_of = |mask: usize| -> Vec<u8> { (0..n).map(|v| ((mask >> v) & 1) as u8).collect() };
    let mut pi = vec![0.0; 1 << n];
    for (mask, p) in pi.iter_mut().enumerate() {
        let c = config_of(mask);
        if model.is_feasible(&c) {
            *p = (-b.value() * model.hamiltonian(&c) as f64).exp();
        }
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    let mut next = vec![0.0; 1 << n];
    for mask in 0..1usize << n {
        if pi[mask] == 0.0 {
            continue;
        }
        let c = config_of(mask);
        for v in 0..n {
            let p1 = site_conditional(model, &c, v, b);
            next[mask | 1 << v] += pi[mask] * p1 / n as f64;
            next[mask & !(1 << v)] += pi[mask] * (1.0 - p1) / n as f64;
        }
    }
    pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Total variation between the default-burn-in Glauber `H` distribution
/// and the enumerated one.
pub fn mcmc_total_variation(model: &GraphModel, b: InverseTemperature, samples: usize, seed: u64) -> Result<f64> {
    let exact = enumerate_histogram(model)?.probabilities(b)?;
    let oracle = SamplingOracle::new(ModelBackend::new(model.clone(), None), vec![b], seed);
    let values = oracle.request_round(&[OracleRequest::new(Phase::Product, 0, 0, samples)])?.remove(0);
    let mut freq = vec![0.0; exact.len()];
    for h in values.hamiltonian_values {
        freq[h as usize] += 1.0 / samples as f64;
    }
    Ok(0.5 * exact.iter().zip(&freq).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

fn determinism_suite(trials: usize, rng: &mut ChaCha8Rng) -> Result<SuiteReport> {
    let mut failures = 0;
    let mut notes = Vec::new();
    for case in 0..trials {
        let hist = random_histogram(rng);
        let h = hist.max_hamiltonian() as u64;
        let b_max = if rng.random_bool(0.5) { InverseTemperature::INFINITY } else { beta(rng.random_range(0.5..4.0)) };
        let mode = if rng.random_bool(0.5) { SamplingMode::Eager } else { SamplingMode::Lazy };
        let config = AnnealConfig::new(InverseTemperature::ZERO, b_max, 0.9, hist.q(), h)
            .with_mode(mode)
            .with_seed(rng.random());
        let backend = crate::oracle::HistogramBackend::new(hist);
        let mut bits = Vec::new();
        for workers in [1, 4, 16] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .expect("thread pool");
            bits.push(pool.install(|| estimate_ratio(&config, &backend))?.log_q_hat.to_bits());
        }
        if bits.windows(2).any(|w| w[0] != w[1]) {
            failures += 1;
            notes.push(format!("case {case}: {bits:x?}"));
        }
    }
    Ok(SuiteReport::counted(Suite::Determinism, trials, failures, 0, notes))
}

/// Runs one suite (or all) with `trials` cases each, defaulting per suite.
pub fn run_suite(suite: Suite, trials: Option<usize>, seed: u64) -> Result<Vec<SuiteReport>> {
    if suite == Suite::All {
        return Suite::EACH.iter().map(|&s| run_one(s, trials, seed)).collect();
    }
    Ok(vec![run_one(suite, trials, seed)?])
}

fn run_one(suite: Suite, trials: Option<usize>, seed: u64) -> Result<SuiteReport> {
    let n = trials.unwrap_or_else(|| suite.default_trials());
    let mut rng = ChaCha8Rng::seed_from_u64(crate::rng::derive_seed(seed, suite as u64));
    match suite {
        Suite::Schedule => schedule_suite(n, &mut rng),
        Suite::Moments => moments_suite(n, &mut rng),
        Suite::Derivative => derivative_suite(n, &mut rng),
        Suite::Kappa => kappa_suite(n, &mut rng),
        Suite::Noisyfind => noisyfind_suite(n, &mut rng, seed),
        Suite::Endtoend => endtoend_suite(n, seed),
        Suite::Glauber => glauber_suite(n, &mut rng, seed),
        Suite::Determinism => determinism_suite(n, &mut rng),
        Suite::All => unreachable!("expanded by run_suite"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for suite in [Suite::Schedule, Suite::Moments, Suite::Derivative, Suite::Kappa, Suite::Glauber] {
            let report = run_suite(suite, Some(10), 1).unwrap().remove(0);
            assert!(report.passed, "{report:?}");
        }
    }
}
