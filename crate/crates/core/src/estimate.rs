//! Results and cost accounting shared by every estimator.

use serde::{Deserialize, Serialize};

/// Work/depth accounting for one estimate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostMetrics {
    /// Oracle calls, i.e. samples drawn.
    pub total_samples: u64,
    /// Batches of mutually non-adaptive oracle queries.
    pub oracle_rounds: u64,
    /// Longest chain of dependent combine steps in the estimator's
    /// reduction tree, including the final product of sub-estimates.
    pub reduction_depth: u32,
    /// Length of the schedule the estimate ran on.
    pub schedule_length: usize,
    /// Sequential decision steps spent locating the PE/PPE split (probe
    /// means plus comparisons); zero when no search ran.
    pub search_depth: u32,
}

/// An estimate `Q̂` of `Z(β_max) / Z(β_min)`, kept as `ln Q̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub log_q_hat: f64,
    pub metrics: CostMetrics,
}

impl RatioEstimate {
    pub fn q_hat(&self) -> f64 {
        self.log_q_hat.exp()
    }

    /// Whether `(1-ε) Q ≤ Q̂ ≤ (1+ε) Q` for the true `ln Q`.
    pub fn within(&self, true_log_q: f64, eps: f64) -> bool {
        let d = self.log_q_hat - true_log_q;
        d >= (-eps).ln_1p() && d <= eps.ln_1p()
    }
}
