//! Noisy binary search for the schedule index where the excitation
//! probability `p_t = Pr[H(X) ≥ 1]`, `X ~ π_{β_t}`, drops through a band
//! `[τ − ε, τ + ε]`.
//!
//! `p_t` is non-increasing in `t`, so "excited" temperatures form a prefix
//! of the schedule. The search returns the length `j ∈ {0, …, l}` of that
//! prefix as seen through Hoeffding-sized probes. With probability at least
//! `1 − δ` every probe at a temperature outside the band lands on the right
//! side of `τ`, which forces `p_j ≥ τ − ε` (for `j ≥ 1`) and
//! `p_{j+1} ≤ τ + ε` (for `j < l`), in 1-based indexing.

use crate::error::{Error, Result};
use crate::oracle::{OracleRequest, SampleBackend, SampleStore, SamplingOracle};
use crate::reduce::ceil_log2;
use crate::rng::Phase;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NoisyFindConfig {
    pub tau: f64,
    pub slack: f64,
    pub delta: f64,
}

impl Default for NoisyFindConfig {
    fn default() -> Self {
        Self { tau: 0.5, slack: 0.25, delta: 0.01 }
    }
}

impl NoisyFindConfig {
    pub fn new(tau: f64, slack: f64, delta: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::InvalidParameter(format!("tau must lie in (0, 1), got {tau}")));
        }
        if !(slack > 0.0 && tau - slack > 0.0 && tau + slack < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "slack {slack} must be positive with [tau - slack, tau + slack] inside (0, 1)"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self { tau, slack, delta })
    }

    /// Probes spent on a schedule of length `l`: `⌈log₂ l⌉ + 1`.
    pub fn probes(&self, l: usize) -> usize {
        ceil_log2(l as u64) as usize + 1
    }

    /// Samples per probe: `⌈ln(2P/δ) / (2ε²)⌉`.
    pub fn probe_size(&self, l: usize) -> usize {
        let p = self.probes(l) as f64;
        ((2.0 * p / self.delta).ln() / (2.0 * self.slack * self.slack)).ceil() as usize
    }

    /// Samples precomputed per temperature so any probe sequence is covered.
    pub fn batch_size(&self, l: usize) -> usize {
        self.probe_size(l) * self.probes(l)
    }
}

/// One request per temperature, sized for every probe the search might make
/// there.
pub fn precompute_batches(l: usize, config: &NoisyFindConfig) -> Vec<OracleRequest> {
    let n = config.batch_size(l);
    (0..l).map(|t| OracleRequest::new(Phase::NoisyFind, t, 0, n)).collect()
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct NoisyFindOutcome {
    /// Number of temperatures judged excited, in `0..=l`.
    pub index: usize,
    /// `(temperature index, judged excited)` in probe order.
    pub probes: Vec<(usize, bool)>,
    /// Sequential steps: one probe-mean tree plus one comparison per probe.
    pub search_depth: u32,
}

/// Runs the search over `l` temperatures. `probe(k, t)` must return the
/// `k`-th disjoint batch of `probe_size(l)` Hamiltonian values at `t`.
pub fn search<F>(l: usize, config: &NoisyFindConfig, mut probe: F) -> Result<NoisyFindOutcome>
where
    F: FnMut(usize, usize) -> Result<Vec<u32>>,
{
    if l == 0 {
        return Err(Error::InvalidParameter("noisy search over an empty schedule".into()));
    }
    let s = config.probe_size(l);
    let mut probes = Vec::with_capacity(config.probes(l));
    let mut excited = |t: usize, probes: &mut Vec<(usize, bool)>| -> Result<bool> {
        let values = probe(probes.len(), t)?;
        debug_assert_eq!(values.len(), s);
        let hits = values.iter().filter(|&&h| h >= 1).count();
        let high = hits as f64 > config.tau * s as f64;
        probes.push((t, high));
        Ok(high)
    };
    let mut base = 0;
    let mut size = l;
    while size > 1 {
        let half = size / 2;
        if excited(base + half, &mut probes)? {
            base += half;
        }
        size -= half;
    }
    let index = base + excited(base, &mut probes)? as usize;
    debug_assert_eq!(probes.len(), config.probes(l));
    Ok(NoisyFindOutcome {
        index,
        search_depth: ceil_log2(s as u64) + probes.len() as u32,
        probes,
    })
}

/// One oracle round per probe.
pub fn noisy_find<B: SampleBackend>(oracle: &SamplingOracle<B>, config: &NoisyFindConfig) -> Result<NoisyFindOutcome> {
    let l = oracle.temperatures().len();
    let s = config.probe_size(l);
    search(l, config, |k, t| {
        let req = OracleRequest::new(Phase::NoisyFind, t, (k * s) as u64, s);
        Ok(oracle.request_round(&[req])?.remove(0).hamiltonian_values)
    })
}

/// Search over batches already materialized by [`precompute_batches`].
pub fn noisy_find_precomputed(l: usize, config: &NoisyFindConfig, store: &SampleStore) -> Result<NoisyFindOutcome> {
    let s = config.probe_size(l);
    search(l, config, |k, t| {
        store
            .slice(Phase::NoisyFind, t, (k * s) as u64, s)
            .map(<[u32]>::to_vec)
            .ok_or_else(|| Error::InvalidParameter(format!("no precomputed search batch at temperature {t}")))
    })
}
