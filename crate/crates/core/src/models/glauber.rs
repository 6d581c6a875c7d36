//! Single-site heat-bath (Glauber) dynamics on the reduced Hamiltonian.

use rand::{Rng, RngCore};

use super::{GraphModel, Hamiltonian};
use crate::beta::InverseTemperature;
use crate::error::{Error, Result};
use crate::oracle::SampleBackend;
use crate::rng::ReplicateStreams;

/// Restart budget when sampling ground states at `β = +∞`.
pub const GROUND_STATE_ATTEMPTS: u64 = 1_000_000;

/// `50·n·⌈ln n + 1⌉` single-site updates.
pub fn default_burn_in(n: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    50 * n as u64 * ((n as f64).ln() + 1.0).ceil() as u64
}

/// `Pr[σ_v = 1 | σ_{−v}]` under `π_β ∝ exp(−β H)`.
pub fn site_conditional(model: &GraphModel, config: &[u8], v: usize, beta: InverseTemperature) -> f64 {
    let neighbors = model.graph().neighbors(v);
    let ones = neighbors.iter().filter(|&&u| config[u] == 1).count() as f64;
    let zeros = neighbors.len() as f64 - ones;
    // H(σ_v = 1) − H(σ_v = 0).
    let delta = match model.hamiltonian_kind() {
        Hamiltonian::Disagreements => zeros - ones,
        Hamiltonian::Agreements => ones - zeros,
        Hamiltonian::Occupied => {
            if ones > 0.0 {
                return 0.0;
            }
            1.0
        }
    };
    if delta == 0.0 {
        0.5
    } else {
        1.0 / (1.0 + (beta.value() * delta).exp())
    }
}

/// Resamples one uniformly chosen vertex from its conditional law.
pub fn glauber_step<R: RngCore + ?Sized>(
    model: &GraphModel,
    config: &mut [u8],
    beta: InverseTemperature,
    rng: &mut R,
) {
    if config.is_empty() {
        return;
    }
    let v = rng.random_range(0..config.len());
    let p = site_conditional(model, config, v, beta);
    config[v] = (rng.random::<f64>() < p) as u8;
}

/// Runs `burn_in` steps from the all-zero configuration.
pub fn sample_mcmc<R: RngCore + ?Sized>(
    model: &GraphModel,
    beta: InverseTemperature,
    burn_in: u64,
    rng: &mut R,
) -> Vec<u8> {
    let mut config = vec![0u8; model.graph().vertex_count()];
    for _ in 0..burn_in {
        glauber_step(model, &mut config, beta, rng);
    }
    config
}

/// Oracle backend drawing each replicate from its own Glauber chain.
///
/// At `β = +∞` the chain runs at zero temperature and is restarted until it
/// ends in a ground state.
#[derive(Debug, Clone)]
pub struct ModelBackend {
    model: GraphModel,
    burn_in: u64,
}

impl ModelBackend {
    pub fn new(model: GraphModel, burn_in: Option<u64>) -> Self {
        let burn_in = burn_in.unwrap_or_else(|| default_burn_in(model.graph().vertex_count()));
        Self { model, burn_in }
    }

    pub fn burn_in(&self) -> u64 {
        self.burn_in
    }

    pub fn model(&self) -> &GraphModel {
        &self.model
    }

    fn draw<R: RngCore>(&self, beta: InverseTemperature, rng: &mut R) -> Result<u32> {
        if beta.is_finite() {
            return Ok(self.model.hamiltonian(&sample_mcmc(&self.model, beta, self.burn_in, rng)));
        }
        for _ in 0..GROUND_STATE_ATTEMPTS {
            let h = self.model.hamiltonian(&sample_mcmc(&self.model, beta, self.burn_in, rng));
            if h == 0 {
                return Ok(0);
            }
        }
        Err(Error::SamplerBudget { attempts: GROUND_STATE_ATTEMPTS })
    }
}

impl SampleBackend for ModelBackend {
    fn max_hamiltonian(&self) -> u32 {
        self.model.max_hamiltonian()
    }

    fn fill(
        &self,
        beta: InverseTemperature,
        _temperature_index: usize,
        streams: &ReplicateStreams,
        first: u64,
        out: &mut [u32],
    ) -> Result<()> {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.draw(beta, &mut streams.replicate(first + k as u64))?;
        }
        Ok(())
    }
}
