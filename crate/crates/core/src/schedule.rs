//! The non-adaptive cooling schedule.
//!
//! A base schedule with a linear segment of pitch `1/(h·L(h))` up to
//! `k/(h·L(h))`, a geometric segment with ratio `γ = 1 + 1/q̄`, and a final
//! jump to `+∞`; the geometric intervals are then refined so that, for every
//! Hamiltonian with `ln|Ω| ≤ q̄` and range `{0, …, h}`, consecutive entries
//! (except the last pair) drop `z = ln Z` by at most `1/L(h)`.
//!
//! `L(h) = max(ln h, 1)` stands in for `ln h` everywhere so that small `h`
//! never divides by zero or a negative logarithm.

use serde::{Deserialize, Serialize};

use crate::beta::InverseTemperature;
use crate::error::{Error, Result};

/// `L(h) = max(ln h, 1)`.
pub fn clamped_log(h: u64) -> f64 {
    if h <= 1 {
        1.0
    } else {
        (h as f64).ln().max(1.0)
    }
}

/// Construction parameters derived from `(q̄, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParameters {
    /// Upper bound on `q = ln|Ω|` actually used, `max(q̄, 1)`.
    pub q_bar: f64,
    /// Hamiltonian range bound actually used, `max(h, 2)`.
    pub h: u64,
    /// `k = ⌈q̄⌉`, the number of linear steps.
    pub k: u64,
    /// `γ = 1 + 1/q̄`.
    pub gamma: f64,
    /// Number of geometric steps, `⌈(1+q̄)·ln(h·L(h))⌉`.
    pub t: u64,
    /// Segments each geometric interval is divided into when deriving the
    /// refinement pitch of the next one, `⌈2 L(h)⌉`.
    pub segments_r: u64,
}

impl ScheduleParameters {
    /// `q_bar` must be a positive finite bound on `ln|Ω|`; values below 1
    /// are raised to 1 and `h < 2` is raised to 2, both of which only
    /// tighten the gap guarantees.
    pub fn new(q_bar: f64, h: u64) -> Result<Self> {
        if !q_bar.is_finite() || q_bar < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "q_bar must be finite and non-negative, got {q_bar}"
            )));
        }
        let q_bar = q_bar.max(1.0);
        let h = h.max(2);
        let l = clamped_log(h);
        let k = q_bar.ceil() as u64;
        let gamma = 1.0 + 1.0 / q_bar;
        let t = (((1.0 + q_bar) * ((h as f64).ln() + l.ln())).ceil() as u64).max(1);
        let segments_r = (2.0 * l).ceil() as u64;
        Ok(Self { q_bar, h, k, gamma, t, segments_r })
    }

    pub fn log_h(&self) -> f64 {
        clamped_log(self.h)
    }

    /// Pitch of the linear segment, `1/(h·L(h))`.
    pub fn linear_step(&self) -> f64 {
        1.0 / (self.h as f64 * self.log_h())
    }

    /// `η_i = k γ^i / (h L(h))`.
    fn eta(&self, i: u64) -> f64 {
        self.k as f64 * self.gamma.powf(i as f64) / (self.h as f64 * self.log_h())
    }

    /// `25 q̄ L(h)² + 4`.
    pub fn length_bound(&self) -> f64 {
        25.0 * self.q_bar * self.log_h().powi(2) + 4.0
    }
}

/// What produced a schedule entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Annotation {
    /// `j / (h L(h))` for `j = 0..=k`.
    Linear { step: u64 },
    /// `η_i = k γ^i / (h L(h))` for `i = 1..=t`.
    ExponentialBoundary { index: u64 },
    /// `α^i_j`, the `j`-th point inserted into `(η_{i-1}, η_i)`.
    Refinement { interval: u64, point: u64 },
    Infinity,
    /// `β_min` or `β_max` added by truncation.
    TruncationEndpoint,
}

/// A strictly increasing list of inverse temperatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingSchedule {
    betas: Vec<InverseTemperature>,
    annotations: Vec<Annotation>,
}

impl CoolingSchedule {
    pub fn new(betas: Vec<InverseTemperature>, annotations: Vec<Annotation>) -> Result<Self> {
        if betas.len() != annotations.len() {
            return Err(Error::InvalidParameter("one annotation per schedule entry required".into()));
        }
        if betas.is_empty() {
            return Err(Error::InvalidParameter("empty cooling schedule".into()));
        }
        if let Some(w) = betas.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "cooling schedule must be strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
        Ok(Self { betas, annotations })
    }

    /// A schedule from bare temperatures, every entry tagged as a
    /// truncation endpoint.
    pub fn from_betas(betas: Vec<InverseTemperature>) -> Result<Self> {
        let annotations = vec![Annotation::TruncationEndpoint; betas.len()];
        Self::new(betas, annotations)
    }

    pub fn betas(&self) -> &[InverseTemperature] {
        &self.betas
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn first(&self) -> InverseTemperature {
        self.betas[0]
    }

    pub fn last(&self) -> InverseTemperature {
        self.betas[self.betas.len() - 1]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serializes")
    }
}

/// `0, 1/(hL), …, k/(hL), kγ/(hL), …, kγ^t/(hL), +∞`; length `k + t + 2`.
pub fn build_base_schedule(params: &ScheduleParameters) -> CoolingSchedule {
    let mut betas = Vec::with_capacity((params.k + params.t + 2) as usize);
    let mut annotations = Vec::with_capacity(betas.capacity());
    let hl = params.h as f64 * params.log_h();
    for step in 0..=params.k {
        betas.push(InverseTemperature::new(step as f64 / hl).expect("finite"));
        annotations.push(Annotation::Linear { step });
    }
    for index in 1..=params.t {
        betas.push(InverseTemperature::new(params.eta(index)).expect("finite"));
        annotations.push(Annotation::ExponentialBoundary { index });
    }
    betas.push(InverseTemperature::INFINITY);
    annotations.push(Annotation::Infinity);
    CoolingSchedule::new(betas, annotations).expect("base schedule is strictly increasing")
}

/// Number of points inserted into `(η_{i-1}, η_i)` and their pitch.
fn refinement_of(params: &ScheduleParameters, etas: &[f64], i: usize) -> (u64, f64) {
    let (lo, hi) = (etas[i - 1], etas[i]);
    if i == 1 {
        return (1, (hi - lo) / 2.0);
    }
    let pitch = (etas[i - 1] - etas[i - 2]) / params.segments_r as f64;
    let ratio = (hi - lo) / pitch;
    // Tolerate rounding on ratios that are integers in exact arithmetic.
    let count = ((ratio - 1e-9).ceil() as u64).saturating_sub(1);
    (count, pitch)
}

/// Inserts interpolation points into every geometric interval of `base`.
///
/// `(η_0, η_1)` receives its midpoint; for `i ≥ 2`, `(η_{i-1}, η_i)` receives
/// points `η_{i-1} + jδ` with `δ = (η_{i-1} - η_{i-2}) / segments_r`.
pub fn refine_schedule(base: &CoolingSchedule, params: &ScheduleParameters) -> CoolingSchedule {
    let k = params.k as usize;
    let base_betas = base.betas();
    // etas[i] = η_i for i = 0..=t; η_0 is the last linear entry.
    let etas: Vec<f64> = base_betas[k..base_betas.len() - 1].iter().map(|b| b.value()).collect();
    let mut betas: Vec<InverseTemperature> = base_betas[..=k].to_vec();
    let mut annotations: Vec<Annotation> = base.annotations()[..=k].to_vec();
    for i in 1..etas.len() {
        let (count, pitch) = refinement_of(params, &etas, i);
        for j in 1..=count {
            let alpha = etas[i - 1] + j as f64 * pitch;
            if alpha >= etas[i] {
                break;
            }
            betas.push(InverseTemperature::new(alpha).expect("finite"));
            annotations.push(Annotation::Refinement { interval: i as u64, point: j });
        }
        betas.push(base_betas[k + i]);
        annotations.push(base.annotations()[k + i]);
    }
    betas.push(InverseTemperature::INFINITY);
    annotations.push(Annotation::Infinity);
    CoolingSchedule::new(betas, annotations).expect("refinement keeps the schedule increasing")
}

/// The full non-adaptive schedule from `0` to `+∞`.
pub fn build_schedule(params: &ScheduleParameters) -> CoolingSchedule {
    refine_schedule(&build_base_schedule(params), params)
}

/// `(β_min, β_s, …, β_t, β_max)` where `s` is the first entry `≥ β_min` and
/// `t` the last `≤ β_max`; an endpoint already present is kept once, with its
/// original annotation.
pub fn truncate_schedule(
    schedule: &CoolingSchedule,
    beta_min: InverseTemperature,
    beta_max: InverseTemperature,
) -> Result<CoolingSchedule> {
    if beta_min >= beta_max {
        return Err(Error::InvalidRange { min: beta_min.to_string(), max: beta_max.to_string() });
    }
    let mut betas = vec![beta_min];
    let mut annotations = vec![Annotation::TruncationEndpoint];
    let mut last_annotation = Annotation::TruncationEndpoint;
    for (&b, &a) in schedule.betas().iter().zip(schedule.annotations()) {
        if b == beta_min {
            annotations[0] = a;
        } else if b == beta_max {
            last_annotation = a;
        } else if b > beta_min && b < beta_max {
            betas.push(b);
            annotations.push(a);
        }
    }
    betas.push(beta_max);
    annotations.push(last_annotation);
    CoolingSchedule::new(betas, annotations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::histogram::HamiltonianHistogram;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn beta(v: f64) -> InverseTemperature {
        InverseTemperature::new(v).unwrap()
    }

    #[test]
    fn parameters_for_q2_h4() {
        let p = ScheduleParameters::new(2.0, 4).unwrap();
        assert_eq!((p.k, p.t, p.segments_r), (2, 6, 3));
        assert_eq!(p.gamma, 1.5);
    }

    #[test]
    fn base_schedule_for_q2_h4() {
        let p = ScheduleParameters::new(2.0, 4).unwrap();
        let base = build_base_schedule(&p);
        assert_eq!(base.len(), 10);
        let hl = 4.0 * 4f64.ln();
        let b = base.betas();
        assert_eq!(b[0], InverseTemperature::ZERO);
        assert!((b[1].value() - 1.0 / hl).abs() < 1e-15);
        assert!((b[2].value() - 2.0 / hl).abs() < 1e-15);
        for i in 1..=6 {
            let expected = 2.0 * 1.5f64.powi(i) / hl;
            assert!((b[2 + i as usize].value() / expected - 1.0).abs() < 1e-14);
        }
        assert_eq!(b[9], InverseTemperature::INFINITY);
    }

    #[test]
    fn linear_step_uses_clamp_for_h2() {
        let p = ScheduleParameters::new(1.0, 2).unwrap();
        assert_eq!(p.linear_step(), 0.5);
        let base = build_base_schedule(&p);
        assert_eq!(base.betas()[1].value(), 0.5);
    }

    #[test]
    fn endpoints_are_zero_and_infinity() {
        for (q, h) in [(1.0, 2), (3.3, 17), (40.0, 1000)] {
            let p = ScheduleParameters::new(q, h).unwrap();
            for s in [build_base_schedule(&p), build_schedule(&p)] {
                assert_eq!(s.first(), InverseTemperature::ZERO);
                assert_eq!(s.last(), InverseTemperature::INFINITY);
            }
        }
    }

    #[test]
    fn first_interval_gets_exactly_its_midpoint() {
        let p = ScheduleParameters::new(2.0, 4).unwrap();
        let base = build_base_schedule(&p);
        let refined = refine_schedule(&base, &p);
        let (eta0, eta1) = (base.betas()[2].value(), base.betas()[3].value());
        let inserted: Vec<f64> = refined
            .betas()
            .iter()
            .zip(refined.annotations())
            .filter(|(_, a)| matches!(a, Annotation::Refinement { interval: 1, .. }))
            .map(|(b, _)| b.value())
            .collect();
        assert_eq!(inserted, vec![(eta0 + eta1) / 2.0]);
    }

    #[test]
    fn length_for_q5_h8() {
        let p = ScheduleParameters::new(5.0, 8).unwrap();
        let l = build_schedule(&p).len();
        assert!(l as f64 <= 25.0 * 5.0 * 8f64.ln().powi(2), "l = {l}");
    }

    #[test]
    fn refinement_points_inside_with_uniform_pitch() {
        let p = ScheduleParameters::new(7.5, 50).unwrap();
        let s = build_schedule(&p);
        let betas = s.betas();
        let ann = s.annotations();
        let mut i = 0;
        while i < betas.len() {
            if let Annotation::Refinement { interval, .. } = ann[i] {
                let lo = betas[i - 1].value();
                let mut pts = vec![];
                while let Annotation::Refinement { interval: iv, .. } = ann[i] {
                    assert_eq!(iv, interval);
                    pts.push(betas[i].value());
                    i += 1;
                }
                let hi = betas[i].value();
                assert!(pts.iter().all(|&x| x > lo && x < hi));
                let pitch = pts[0] - lo;
                for w in pts.windows(2) {
                    assert!(((w[1] - w[0]) / pitch - 1.0).abs() < 1e-12);
                }
            }
            i += 1;
        }
    }

    #[test]
    fn construction_is_bit_identical() {
        let p = ScheduleParameters::new(12.25, 333).unwrap();
        let a = build_schedule(&p);
        let b = build_schedule(&ScheduleParameters::new(12.25, 333).unwrap());
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.betas().iter().zip(b.betas()).all(|(x, y)| x.value().to_bits() == y.value().to_bits()));
    }

    #[test]
    fn truncation_cases() {
        let p = ScheduleParameters::new(2.0, 4).unwrap();
        let s = build_schedule(&p);
        let same = truncate_schedule(&s, InverseTemperature::ZERO, InverseTemperature::INFINITY).unwrap();
        assert_eq!(same, s);

        let b = s.betas();
        let mid = beta((b[3].value() + b[4].value()) / 2.0);
        let t = truncate_schedule(&s, mid, InverseTemperature::INFINITY).unwrap();
        assert_eq!(t.betas()[0], mid);
        assert_eq!(t.betas()[1], b[4]);
        assert_eq!(t.annotations()[0], Annotation::TruncationEndpoint);

        let hi = beta(mid.value() + 1e-9);
        let two = truncate_schedule(&s, mid, hi).unwrap();
        assert_eq!(two.betas(), &[mid, hi]);

        assert!(matches!(truncate_schedule(&s, hi, mid), Err(Error::InvalidRange { .. })));
        assert!(truncate_schedule(&s, mid, mid).is_err());
    }

    #[test]
    fn truncation_keeps_one_copy_of_present_endpoints() {
        let p = ScheduleParameters::new(3.0, 9).unwrap();
        let s = build_schedule(&p);
        let (lo, hi) = (s.betas()[2], s.betas()[7]);
        let t = truncate_schedule(&s, lo, hi).unwrap();
        assert_eq!(t.betas(), &s.betas()[2..=7]);
        assert_eq!(t.annotations(), &s.annotations()[2..=7]);
    }

    #[test]
    fn gap_bounds_hold_on_random_histograms() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..40 {
            let h = rng.random_range(2..=64usize);
            let counts: Vec<u64> = (0..=h)
                .map(|i| if i == 0 { rng.random_range(1..10) } else if rng.random_bool(0.3) { 0 } else { rng.random_range(0..20_000) })
                .collect();
            let hist = HamiltonianHistogram::new(counts).unwrap();
            let q_bar = hist.q() * rng.random_range(1.0..1.5);
            let p = ScheduleParameters::new(q_bar, h as u64).unwrap();
            let s = build_schedule(&p);
            let z: Vec<f64> = s.betas().iter().map(|&b| hist.log_z(b).unwrap()).collect();
            let l = z.len();
            for j in 1..l - 1 {
                assert!(z[j - 1] - z[j] <= 1.0 / p.log_h() + 1e-9, "step {j} of {l}");
            }
            assert!(z[l - 2] - z[l - 1] <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn length_bound_grid() {
        for q in [1.0, 2.0, 5.0, 10.0, 50.0, 200.0] {
            for h in [2u64, 3, 8, 64, 1024, 1 << 20] {
                let p = ScheduleParameters::new(q, h).unwrap();
                let l = build_schedule(&p).len();
                assert!(l as f64 <= p.length_bound(), "q {q} h {h}: l = {l}");
            }
        }
    }
}
