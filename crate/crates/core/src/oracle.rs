//! Sampling oracles: the only source of randomness the estimators see.
//!
//! An oracle serves independent draws `X ~ π_β` at the temperatures of one
//! fixed table and reports `H(X)`. Queries are grouped into *rounds*: all
//! requests of a round are issued together and none may depend on another's
//! outcome. Each request names a stream key `(phase, temperature index,
//! replicate range)`; keys within a round must be disjoint, and every value
//! is a pure function of `(seed, run, key, replicate)`.
//!
//! The statistical guarantees of the estimators assume exact samples. The
//! histogram backend is exact; MCMC backends (see [`crate::models`]) are only
//! approximately so, with bias controlled by their burn-in.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::beta::InverseTemperature;
use crate::error::{Error, Result};
use crate::histogram::{GibbsSampler, HamiltonianHistogram};
use crate::rng::{Phase, ReplicateStreams};

/// Replicates generated per parallel task.
const CHUNK: usize = 1 << 14;

/// Something that can draw `H(X)` for `X ~ π_β`.
pub trait SampleBackend: Send + Sync {
    fn max_hamiltonian(&self) -> u32;

    /// Fills `out[k]` with the Hamiltonian of replicate `first + k` of
    /// `streams`. The value for a replicate must not depend on `first` or
    /// on `out.len()`.
    fn fill(
        &self,
        beta: InverseTemperature,
        temperature_index: usize,
        streams: &ReplicateStreams,
        first: u64,
        out: &mut [u32],
    ) -> Result<()>;
}

impl<B: SampleBackend + ?Sized> SampleBackend for &B {
    fn max_hamiltonian(&self) -> u32 {
        (**self).max_hamiltonian()
    }

    fn fill(
        &self,
        beta: InverseTemperature,
        temperature_index: usize,
        streams: &ReplicateStreams,
        first: u64,
        out: &mut [u32],
    ) -> Result<()> {
        (**self).fill(beta, temperature_index, streams, first, out)
    }
}

/// Exact sampler of `H(X)` from a histogram.
#[derive(Debug, Clone)]
pub struct HistogramBackend {
    hist: HamiltonianHistogram,
}

impl HistogramBackend {
    pub fn new(hist: HamiltonianHistogram) -> Self {
        Self { hist }
    }

    pub fn histogram(&self) -> &HamiltonianHistogram {
        &self.hist
    }
}

impl SampleBackend for HistogramBackend {
    fn max_hamiltonian(&self) -> u32 {
        self.hist.max_hamiltonian()
    }

    fn fill(
        &self,
        beta: InverseTemperature,
        _temperature_index: usize,
        streams: &ReplicateStreams,
        first: u64,
        out: &mut [u32],
    ) -> Result<()> {
        let sampler = GibbsSampler::new(&self.hist, beta)?;
        let mut rng = streams.sequential(first, 2);
        for o in out {
            *o = sampler.sample(&mut rng);
        }
        Ok(())
    }
}

/// A synthetic two-level backend: at temperature index `i` it returns
/// `H = 1` with probability `excitation[i]` and `H = 0` otherwise.
#[derive(Debug, Clone)]
pub struct FixedProbabilityBackend {
    excitation: Vec<f64>,
}

impl FixedProbabilityBackend {
    pub fn new(excitation: Vec<f64>) -> Result<Self> {
        if let Some(p) = excitation.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
        }
        Ok(Self { excitation })
    }
}

impl SampleBackend for FixedProbabilityBackend {
    fn max_hamiltonian(&self) -> u32 {
        1
    }

    fn fill(
        &self,
        _beta: InverseTemperature,
        temperature_index: usize,
        streams: &ReplicateStreams,
        first: u64,
        out: &mut [u32],
    ) -> Result<()> {
        let p = *self.excitation.get(temperature_index).ok_or(Error::TemperatureIndex {
            index: temperature_index,
            len: self.excitation.len(),
        })?;
        let sampler = GibbsSampler::from_probabilities(&[1.0 - p, p]);
        let mut rng = streams.sequential(first, 2);
        for o in out {
            *o = sampler.sample(&mut rng);
        }
        Ok(())
    }
}

/// A request for `count` replicates, starting at `first_replicate`, at one
/// temperature of the oracle's table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleRequest {
    pub phase: Phase,
    pub temperature_index: usize,
    pub first_replicate: u64,
    pub count: usize,
}

impl OracleRequest {
    pub fn new(phase: Phase, temperature_index: usize, first_replicate: u64, count: usize) -> Self {
        Self { phase, temperature_index, first_replicate, count }
    }

    /// `(phase, temperature index, replicate range)`.
    pub fn stream_key(&self) -> (Phase, usize, std::ops::Range<u64>) {
        (
            self.phase,
            self.temperature_index,
            self.first_replicate..self.first_replicate + self.count as u64,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBatchResult {
    pub hamiltonian_values: Vec<u32>,
}

/// An oracle over a fixed temperature table with round/sample accounting.
#[derive(Debug)]
pub struct SamplingOracle<B> {
    backend: B,
    temperatures: Vec<InverseTemperature>,
    seed: u64,
    run: u32,
    rounds: AtomicU64,
    samples: AtomicU64,
}

impl<B: SampleBackend> SamplingOracle<B> {
    pub fn new(backend: B, temperatures: Vec<InverseTemperature>, seed: u64) -> Self {
        Self::with_run(backend, temperatures, seed, 0)
    }

    /// Independent runs over the same seed use distinct `run` labels.
    pub fn with_run(backend: B, temperatures: Vec<InverseTemperature>, seed: u64, run: u32) -> Self {
        Self {
            backend,
            temperatures,
            seed,
            run,
            rounds: AtomicU64::new(0),
            samples: AtomicU64::new(0),
        }
    }

    pub fn temperatures(&self) -> &[InverseTemperature] {
        &self.temperatures
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn oracle_rounds(&self) -> u64 {
        self.rounds.load(Ordering::Relaxed)
    }

    pub fn total_samples(&self) -> u64 {
        self.samples.load(Ordering::Relaxed)
    }

    fn validate(&self, requests: &[OracleRequest]) -> Result<()> {
        for r in requests {
            if r.count == 0 {
                return Err(Error::InvalidParameter("oracle request with count 0".into()));
            }
            if r.temperature_index >= self.temperatures.len() {
                return Err(Error::TemperatureIndex {
                    index: r.temperature_index,
                    len: self.temperatures.len(),
                });
            }
        }
        let mut keys: Vec<_> = requests.iter().map(OracleRequest::stream_key).collect();
        keys.sort_by_key(|(p, t, range)| (*p, *t, range.start));
        for w in keys.windows(2) {
            let ((p0, t0, r0), (p1, t1, r1)) = (&w[0], &w[1]);
            if p0 == p1 && t0 == t1 && r0.end > r1.start {
                return Err(Error::OverlappingStreams(format!(
                    "{p0:?} at temperature {t0}: replicates {r0:?} and {r1:?}"
                )));
            }
        }
        Ok(())
    }

    /// Serves every request as one non-adaptive round.
    ///
    /// An empty request list is not a round and leaves the counters alone.
    pub fn request_round(&self, requests: &[OracleRequest]) -> Result<Vec<OracleBatchResult>> {
        if requests.is_empty() {
            return Ok(Vec::new());
        }
        self.validate(requests)?;
        let mut outputs: Vec<Vec<u32>> = requests.iter().map(|r| vec![0u32; r.count]).collect();
        requests
            .par_iter()
            .zip(outputs.par_iter_mut())
            .try_for_each(|(req, out)| {
                let streams =
                    ReplicateStreams::new(self.seed, self.run, req.phase, req.temperature_index);
                let beta = self.temperatures[req.temperature_index];
                out.par_chunks_mut(CHUNK).enumerate().try_for_each(|(c, chunk)| {
                    let first = req.first_replicate + (c * CHUNK) as u64;
                    self.backend.fill(beta, req.temperature_index, &streams, first, chunk)
                })
            })?;
        debug_assert!(outputs
            .iter()
            .flatten()
            .all(|&v| v <= self.backend.max_hamiltonian()));
        self.rounds.fetch_add(1, Ordering::Relaxed);
        let drawn: u64 = requests.iter().map(|r| r.count as u64).sum();
        self.samples.fetch_add(drawn, Ordering::Relaxed);
        Ok(outputs
            .into_iter()
            .map(|hamiltonian_values| OracleBatchResult { hamiltonian_values })
            .collect())
    }
}

/// Exact histogram-backed oracle over `temperatures`.
pub fn oracle_from_histogram(
    hist: HamiltonianHistogram,
    temperatures: Vec<InverseTemperature>,
    seed: u64,
) -> SamplingOracle<HistogramBackend> {
    SamplingOracle::new(HistogramBackend::new(hist), temperatures, seed)
}

/// Materialized round results, addressable by `(phase, temperature)` and
/// replicate index.
#[derive(Debug, Default, Clone)]
pub struct SampleStore {
    batches: HashMap<(Phase, usize), (u64, Vec<u32>)>,
}

impl SampleStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a round's results. A later batch for the same `(phase,
    /// temperature)` replaces the earlier one.
    pub fn insert_round(&mut self, requests: &[OracleRequest], results: Vec<OracleBatchResult>) {
        for (r, res) in requests.iter().zip(results) {
            self.batches
                .insert((r.phase, r.temperature_index), (r.first_replicate, res.hamiltonian_values));
        }
    }

    /// Replicates `start .. start + count` of one batch.
    pub fn slice(&self, phase: Phase, temperature_index: usize, start: u64, count: usize) -> Option<&[u32]> {
        let (first, values) = self.batches.get(&(phase, temperature_index))?;
        let offset = start.checked_sub(*first)? as usize;
        values.get(offset..offset + count)
    }
}
