//! Parallel simulated annealing for Gibbs partition-function ratios.
//!
//! Given a sampling oracle for a Gibbs distribution
//! `π_β(x) ∝ exp(-β H(x))` with integer `H ∈ [0, h]`, the crate estimates
//! `Q = Z(β_max) / Z(β_min)` to relative error `ε` with few oracle rounds
//! and a shallow reduction tree.

pub mod annealer;
pub mod beta;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod estimate;
pub mod histogram;
pub mod logspace;
pub mod models;
pub mod noisyfind;
pub mod oracle;
pub mod reduce;
pub mod rng;
pub mod schedule;
pub mod verify;

pub use beta::InverseTemperature;
pub use error::{Error, Result};
pub use estimate::{CostMetrics, RatioEstimate};
pub use histogram::HamiltonianHistogram;
pub use schedule::CoolingSchedule;
