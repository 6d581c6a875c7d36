//! Ising and hard-core models on graphs, and their reduction to integer
//! Hamiltonians.

mod enumeration;
mod glauber;
mod graph;

pub use enumeration::{enumerate_histogram, enumerate_partition_function, ENUMERATION_LIMIT};
pub use glauber::{default_burn_in, glauber_step, sample_mcmc, site_conditional, ModelBackend, GROUND_STATE_ATTEMPTS};
pub use graph::Graph;

use serde::Serialize;

use crate::beta::InverseTemperature;
use crate::error::{Error, Result};

/// Which two-state spin system lives on the graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    /// `π(σ) ∝ γ^{m(σ)} λ^{n₊(σ)}`, `m(σ)` = number of monochromatic edges.
    Ising { gamma: f64, lambda: f64 },
    /// `π(σ) ∝ λ^{|σ|}` over independent sets.
    HardCore { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hamiltonian {
    /// `H = m − m(σ)` (ferromagnetic Ising).
    Disagreements,
    /// `H = m(σ)` (antiferromagnetic Ising).
    Agreements,
    /// `H = n₊(σ)` (hard-core, infeasible states excluded).
    Occupied,
}

/// A graph together with model parameters.
#[derive(Debug, Clone)]
pub struct GraphModel {
    graph: Graph,
    kind: ModelKind,
    hamiltonian: Hamiltonian,
}

impl GraphModel {
    pub fn new(graph: Graph, kind: ModelKind) -> Result<Self> {
        let hamiltonian = match kind {
            ModelKind::Ising { gamma, lambda } => {
                check_positive("gamma", gamma)?;
                check_positive("lambda", lambda)?;
                if lambda != 1.0 {
                    return Err(Error::UnsupportedParameterization(format!(
                        "Ising model requires lambda = 1 (no external field), got {lambda}"
                    )));
                }
                if gamma >= 1.0 {
                    Hamiltonian::Disagreements
                } else {
                    Hamiltonian::Agreements
                }
            }
            ModelKind::HardCore { lambda } => {
                check_positive("lambda", lambda)?;
                if lambda > 1.0 {
                    return Err(Error::UnsupportedParameterization(format!(
                        "hard-core model requires lambda <= 1, got {lambda}"
                    )));
                }
                Hamiltonian::Occupied
            }
        };
        Ok(Self { graph, kind, hamiltonian })
    }

    pub fn ising(graph: Graph, gamma: f64) -> Result<Self> {
        Self::new(graph, ModelKind::Ising { gamma, lambda: 1.0 })
    }

    pub fn hard_core(graph: Graph, lambda: f64) -> Result<Self> {
        Self::new(graph, ModelKind::HardCore { lambda })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn hamiltonian_kind(&self) -> Hamiltonian {
        self.hamiltonian
    }

    /// Largest value `H` can take.
    pub fn max_hamiltonian(&self) -> u32 {
        match self.hamiltonian {
            Hamiltonian::Disagreements | Hamiltonian::Agreements => self.graph.edge_count() as u32,
            Hamiltonian::Occupied => self.graph.vertex_count() as u32,
        }
    }

    /// Whether `config` lies in the sample space (for hard-core: is an
    /// independent set).
    pub fn is_feasible(&self, config: &[u8]) -> bool {
        match self.hamiltonian {
            Hamiltonian::Occupied => self
                .graph
                .edges()
                .iter()
                .all(|&(u, v)| config[u] == 0 || config[v] == 0),
            _ => true,
        }
    }

    pub fn hamiltonian(&self, config: &[u8]) -> u32 {
        match self.hamiltonian {
            Hamiltonian::Occupied => config.iter().map(|&s| s as u32).sum(),
            Hamiltonian::Agreements => self.monochromatic_edges(config),
            Hamiltonian::Disagreements => self.graph.edge_count() as u32 - self.monochromatic_edges(config),
        }
    }

    fn monochromatic_edges(&self, config: &[u8]) -> u32 {
        self.graph
            .edges()
            .iter()
            .filter(|&&(u, v)| config[u] == config[v])
            .count() as u32
    }

    /// Unnormalized model weight of a feasible configuration.
    pub fn weight(&self, config: &[u8]) -> f64 {
        match self.kind {
            ModelKind::Ising { gamma, lambda } => {
                let plus: i32 = config.iter().map(|&s| s as i32).sum();
                gamma.powi(self.monochromatic_edges(config) as i32) * lambda.powi(plus)
            }
            ModelKind::HardCore { lambda } => {
                if self.is_feasible(config) {
                    lambda.powi(self.hamiltonian(config) as i32)
                } else {
                    0.0
                }
            }
        }
    }

    /// Diagnostic only: whether the parameters lie in the uniqueness regime
    /// of the infinite `Δ`-regular tree. Always true for `Δ < 3`.
    pub fn uniqueness_ok(&self) -> bool {
        let d = self.graph.max_degree() as f64;
        if d < 3.0 {
            return true;
        }
        match self.kind {
            ModelKind::Ising { gamma, .. } => (d - 2.0) / d < gamma && gamma < d / (d - 2.0),
            ModelKind::HardCore { lambda } => lambda <= (d - 1.0).powf(d - 1.0) / (d - 2.0).powf(d),
        }
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be a positive real, got {value}")))
    }
}

/// How an estimated ratio `Q = Z_H(β_max)/Z_H(β_min)` maps back to the
/// model's partition function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HamiltonianReduction {
    pub hamiltonian: Hamiltonian,
    pub h: u32,
    pub beta_min: InverseTemperature,
    pub beta_max: InverseTemperature,
    /// `ln` of the known factor between `Z_model` and `Z_H` at the model's
    /// own temperature.
    pub external_factor_log: f64,
    /// `ln Z_H` at whichever endpoint is known in closed form.
    pub trivial_endpoint_log: f64,
    /// `+1` if `Z_model ∝ Q`, `−1` if `Z_model ∝ 1/Q`.
    pub ratio_exponent: f64,
}

impl HamiltonianReduction {
    /// `β_min == β_max`: `Q = 1` without sampling.
    pub fn is_trivial(&self) -> bool {
        self.beta_min == self.beta_max
    }

    pub fn log_z_model(&self, log_q: f64) -> f64 {
        self.external_factor_log + self.trivial_endpoint_log + self.ratio_exponent * log_q
    }

    /// Inverse of [`Self::log_z_model`].
    pub fn log_q_from_model(&self, log_z_model: f64) -> f64 {
        (log_z_model - self.external_factor_log - self.trivial_endpoint_log) / self.ratio_exponent
    }
}

pub fn reduce_model(model: &GraphModel) -> Result<HamiltonianReduction> {
    let n = model.graph().vertex_count() as f64;
    let m = model.graph().edge_count() as f64;
    let h = model.max_hamiltonian();
    let ln2 = std::f64::consts::LN_2;
    Ok(match model.kind() {
        ModelKind::Ising { gamma, .. } => {
            let target = InverseTemperature::new(gamma.ln().abs())?;
            let external = match model.hamiltonian_kind() {
                Hamiltonian::Disagreements => m * gamma.ln(),
                _ => 0.0,
            };
            HamiltonianReduction {
                hamiltonian: model.hamiltonian_kind(),
                h,
                beta_min: InverseTemperature::ZERO,
                beta_max: target,
                external_factor_log: external,
                trivial_endpoint_log: n * ln2,
                ratio_exponent: 1.0,
            }
        }
        ModelKind::HardCore { lambda } => HamiltonianReduction {
            hamiltonian: Hamiltonian::Occupied,
            h,
            beta_min: InverseTemperature::new(-lambda.ln())?,
            beta_max: InverseTemperature::INFINITY,
            external_factor_log: 0.0,
            trivial_endpoint_log: 0.0,
            ratio_exponent: -1.0,
        },
    })
}
