//! Exact Hamiltonian histograms and the closed-form mathematics they enable.
//!
//! With `c_i = |{x : H(x) = i}|` the partition function is
//! `Z(β) = Σ_i c_i e^{-iβ}`, so `z = ln Z`, its derivatives, the relative
//! second moments of annealing weights and exact Gibbs samples of `H(X)`
//! are all computable from the counts alone. These are the brute-force
//! references every estimator in the crate is checked against.

use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::beta::InverseTemperature;
use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianHistogram {
    counts: Vec<f64>,
    log_counts: Vec<f64>,
    q: f64,
}

impl HamiltonianHistogram {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        Self::from_f64_counts(counts.into_iter().map(|c| c as f64).collect())
    }

    /// Counts given as floats so that totals beyond `u64` (q > 44) remain
    /// expressible. Every entry must be a finite non-negative integer.
    pub fn from_f64_counts(counts: Vec<f64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidHistogram("counts must be non-empty".into()));
        }
        if counts.len() > u32::MAX as usize {
            return Err(Error::InvalidHistogram("too many Hamiltonian levels".into()));
        }
        for (i, &c) in counts.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidHistogram(format!("count c_{i} = {c} is negative or not finite")));
            }
            if c.fract() != 0.0 {
                return Err(Error::InvalidHistogram(format!("count c_{i} = {c} is not an integer")));
            }
        }
        if counts.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidHistogram("all counts are zero".into()));
        }
        let log_counts: Vec<f64> = counts.iter().map(|c| c.ln()).collect();
        let q = log_sum_exp(&log_counts);
        Ok(Self { counts, log_counts, q })
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// `h`, the largest representable Hamiltonian value.
    pub fn max_hamiltonian(&self) -> u32 {
        (self.counts.len() - 1) as u32
    }

    /// `q = ln |Ω|`.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn ground_count(&self) -> f64 {
        self.counts[0]
    }

    /// True when every configuration has `H = 0`, i.e. `Z` is constant in β.
    pub fn is_ground_only(&self) -> bool {
        self.counts[1..].iter().all(|&c| c == 0.0)
    }

    /// Terms `ln c_i - iβ`, with `-inf` for empty levels.
    fn log_terms(&self, beta: f64) -> impl Iterator<Item = f64> + '_ {
        self.log_counts.iter().enumerate().map(move |(i, &lc)| {
            if lc == f64::NEG_INFINITY || i == 0 {
                lc
            } else {
                lc - i as f64 * beta
            }
        })
    }

    /// `z(β) = ln Z(β)`.
    pub fn log_z(&self, beta: InverseTemperature) -> Result<f64> {
        if beta.is_infinite() {
            if self.counts[0] == 0.0 {
                return Err(Error::EmptyGroundState);
            }
            return Ok(self.log_counts[0]);
        }
        let terms: Vec<f64> = self.log_terms(beta.value()).collect();
        Ok(log_sum_exp(&terms))
    }

    /// Gibbs probabilities `Pr[H = i]` at β.
    pub fn probabilities(&self, beta: InverseTemperature) -> Result<Vec<f64>> {
        if beta.is_infinite() {
            if self.counts[0] == 0.0 {
                return Err(Error::EmptyGroundState);
            }
            let mut p = vec![0.0; self.counts.len()];
            p[0] = 1.0;
            return Ok(p);
        }
        let terms: Vec<f64> = self.log_terms(beta.value()).collect();
        let z = log_sum_exp(&terms);
        Ok(terms.into_iter().map(|t| (t - z).exp()).collect())
    }

    /// Mean and variance of `H` under `π_β`.
    fn moments(&self, beta: InverseTemperature) -> Result<(f64, f64)> {
        let p = self.probabilities(beta)?;
        let mean: f64 = p.iter().enumerate().map(|(i, pi)| i as f64 * pi).sum();
        let var: f64 = p
            .iter()
            .enumerate()
            .map(|(i, pi)| (i as f64 - mean).powi(2) * pi)
            .sum();
        Ok((mean, var))
    }

    /// `z'(β) = -E_β[H]`.
    pub fn log_z_derivative(&self, beta: InverseTemperature) -> Result<f64> {
        Ok(-self.moments(beta)?.0)
    }

    /// `z''(β) = Var_β[H]`.
    pub fn log_z_second_derivative(&self, beta: InverseTemperature) -> Result<f64> {
        Ok(self.moments(beta)?.1)
    }

    /// `Pr_β[H ≥ 1] = 1 - c_0 / Z(β)`.
    pub fn excitation_probability(&self, beta: InverseTemperature) -> Result<f64> {
        let z = self.log_z(beta)?;
        Ok(-(self.log_counts[0] - z).exp_m1())
    }

    /// Relative second moment `E[W²]/E[W]²` of the one-step weight
    /// `W = e^{(β_from - β_to) H(X)}`, `X ~ π_{β_from}`; equal to
    /// `Z(2β_to - β_from) Z(β_from) / Z(β_to)²`.
    pub fn relative_second_moment(
        &self,
        from: InverseTemperature,
        to: InverseTemperature,
    ) -> Result<f64> {
        if from > to {
            return Err(Error::InvalidRange { min: from.to_string(), max: to.to_string() });
        }
        if from == to {
            return Ok(1.0);
        }
        if to.is_infinite() {
            // W = 1[H = 0]: S_rel = Z(from) / c_0.
            let ground = self.log_z(InverseTemperature::INFINITY)?;
            return Ok((self.log_z(from)? - ground).exp());
        }
        let reflected = InverseTemperature::new(2.0 * to.value() - from.value())?;
        let s = self.log_z(reflected)? + self.log_z(from)? - 2.0 * self.log_z(to)?;
        Ok(s.exp())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.to_owned(), source })?;
        let raw: HistogramFile = serde_json::from_str(&text)
            .map_err(|source| Error::Json { path: path.to_owned(), source })?;
        Self::from_f64_counts(raw.counts)
    }

    pub fn to_json(&self) -> String {
        let counts: Vec<serde_json::Value> = self
            .counts
            .iter()
            .map(|&c| {
                if c <= (1u64 << 53) as f64 {
                    serde_json::Value::from(c as u64)
                } else {
                    serde_json::Value::from(c)
                }
            })
            .collect();
        serde_json::json!({ "counts": counts }).to_string()
    }
}

/// On-disk histogram: `{"counts": [c_0, …, c_h]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct HistogramFile {
    pub counts: Vec<f64>,
}

/// `z_exact`: `ln Z(β)`.
pub fn z_exact(hist: &HamiltonianHistogram, beta: InverseTemperature) -> Result<f64> {
    hist.log_z(beta)
}

pub fn z_prime_exact(hist: &HamiltonianHistogram, beta: InverseTemperature) -> Result<f64> {
    hist.log_z_derivative(beta)
}

pub fn z_second_exact(hist: &HamiltonianHistogram, beta: InverseTemperature) -> Result<f64> {
    hist.log_z_second_derivative(beta)
}

pub fn srel_exact(
    hist: &HamiltonianHistogram,
    beta_from: InverseTemperature,
    beta_to: InverseTemperature,
) -> Result<f64> {
    hist.relative_second_moment(beta_from, beta_to)
}

/// Draws one `H(X)` with `X ~ π_β`.
pub fn exact_sample<R: RngCore + ?Sized>(
    hist: &HamiltonianHistogram,
    beta: InverseTemperature,
    rng: &mut R,
) -> Result<u32> {
    Ok(GibbsSampler::new(hist, beta)?.sample(rng))
}

/// Walker/Vose alias table over `H ∈ {0, …, h}` at a fixed β.
///
/// Every draw consumes exactly one `u64`, which keeps counter-positioned
/// random streams aligned with replicate indices.
#[derive(Debug, Clone)]
pub struct GibbsSampler {
    threshold: Vec<u64>,
    alias: Vec<u32>,
}

impl GibbsSampler {
    pub fn new(hist: &HamiltonianHistogram, beta: InverseTemperature) -> Result<Self> {
        Ok(Self::from_probabilities(&hist.probabilities(beta)?))
    }

    pub fn from_probabilities(p: &[f64]) -> Self {
        let n = p.len();
        let total: f64 = p.iter().sum();
        let mut scaled: Vec<f64> = p.iter().map(|&x| x * n as f64 / total).collect();
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let mut accept = vec![1.0f64; n];
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            accept[s] = scaled[s];
            alias[s] = l as u32;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers in either list are full columns up to rounding.
        let threshold = accept
            .iter()
            .map(|&a| {
                if a >= 1.0 {
                    u64::MAX
                } else {
                    (a * 18_446_744_073_709_551_616.0) as u64
                }
            })
            .collect();
        Self { threshold, alias }
    }

    #[inline]
    pub fn sample_from_u64(&self, u: u64) -> u32 {
        let m = u as u128 * self.threshold.len() as u128;
        let column = (m >> 64) as usize;
        let frac = m as u64;
        if frac < self.threshold[column] || self.alias[column] as usize == column {
            column as u32
        } else {
            self.alias[column]
        }
    }

    #[inline]
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u32 {
        self.sample_from_u64(rng.next_u64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop, prop_assert, prop_assume, proptest, Strategy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn beta(v: f64) -> InverseTemperature {
        InverseTemperature::new(v).unwrap()
    }

    fn hist(c: &[u64]) -> HamiltonianHistogram {
        HamiltonianHistogram::new(c.to_vec()).unwrap()
    }

    #[test]
    fn validation() {
        assert!(HamiltonianHistogram::new(vec![]).is_err());
        assert!(HamiltonianHistogram::new(vec![0, 0, 0]).is_err());
        assert!(HamiltonianHistogram::from_f64_counts(vec![1.0, -2.0]).is_err());
        assert!(HamiltonianHistogram::from_f64_counts(vec![1.5]).is_err());
        let h = hist(&[2, 3, 5]);
        assert_eq!(h.max_hamiltonian(), 2);
        assert!((h.q() - 10f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn z_examples() {
        assert!((z_exact(&hist(&[1, 1, 0]), beta(0.0)).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(z_exact(&hist(&[1, 0, 1]), InverseTemperature::INFINITY).unwrap(), 0.0);
        let expected = (2.0 + 3.0 * (-1f64).exp() + 5.0 * (-2f64).exp()).ln();
        assert!((z_exact(&hist(&[2, 3, 5]), beta(1.0)).unwrap() - expected).abs() < 1e-14);
        assert!(matches!(
            z_exact(&hist(&[0, 1, 1]), InverseTemperature::INFINITY),
            Err(Error::EmptyGroundState)
        ));
    }

    #[test]
    fn derivative_examples() {
        assert!((z_prime_exact(&hist(&[1, 0, 1]), beta(0.0)).unwrap() + 1.0).abs() < 1e-15);
        let h = hist(&[3, 7, 11, 2, 9]);
        let far = beta(2.0 * h.q() + 20.0);
        assert!(z_prime_exact(&h, far).unwrap().abs() <= (-10f64).exp());
        let flat = hist(&[17, 0, 0]);
        for b in [0.0, 0.3, 5.0, 1e3] {
            assert_eq!(z_prime_exact(&flat, beta(b)).unwrap(), 0.0);
            assert_eq!(z_second_exact(&flat, beta(b)).unwrap(), 0.0);
        }
    }

    #[test]
    fn srel_examples() {
        let h = hist(&[1, 0, 1]);
        assert_eq!(srel_exact(&h, beta(0.7), beta(0.7)).unwrap(), 1.0);
        // Z(0) = 2, Z(ln 2) = 5/4, Z(ln 2 / 2) = 3/2.
        let s = srel_exact(&h, beta(0.0), beta(2f64.ln() / 2.0)).unwrap();
        assert!((s - 10.0 / 9.0).abs() < 1e-14);
        let flat = hist(&[4, 0, 0, 0]);
        assert!((srel_exact(&flat, beta(0.0), beta(3.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((srel_exact(&flat, beta(1.0), InverseTemperature::INFINITY).unwrap() - 1.0).abs() < 1e-15);
        // W = 1[H=0] at X ~ π_0: S_rel = 1 / Pr[H=0] = 2.
        assert!((srel_exact(&h, beta(0.0), InverseTemperature::INFINITY).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn excitation_probability_matches_definition() {
        let h = hist(&[1, 3, 1, 0]);
        let p = h.excitation_probability(beta(2f64.ln())).unwrap();
        assert!((p - 1.75 / 2.75).abs() < 1e-15);
        assert_eq!(h.excitation_probability(InverseTemperature::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn sampler_support_and_endpoint() {
        let h = hist(&[1, 0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = exact_sample(&h, beta(0.0), &mut rng).unwrap();
            assert!(x == 0 || x == 2);
            assert_eq!(exact_sample(&h, InverseTemperature::INFINITY, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn sampler_chi_square_uniform_two_point() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let h = hist(&[1, 0, 1]);
        let sampler = GibbsSampler::new(&h, beta(0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut counts = [0u64; 3];
        for _ in 0..n {
            counts[sampler.sample(&mut rng) as usize] += 1;
        }
        assert_eq!(counts[1], 0);
        let e = n as f64 / 2.0;
        let chi2 = (counts[0] as f64 - e).powi(2) / e + (counts[2] as f64 - e).powi(2) / e;
        let critical = ChiSquared::new(1.0).unwrap().inverse_cdf(1.0 - 1e-3);
        assert!(chi2 < critical, "chi2 = {chi2}");
    }

    #[test]
    fn sampler_direct_formula() {
        // Pr[H = 1] = (1/3) / (1 + 1/3) = 1/4.
        let h = hist(&[1, 1, 0]);
        let sampler = GibbsSampler::new(&h, beta(3f64.ln())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let ones = (0..n).filter(|_| sampler.sample(&mut rng) == 1).count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.25).abs() < 4.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }

    #[test]
    fn sampler_total_variation_random_histograms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..20u64 {
            let len = 3 + (case as usize * 7) % 63;
            let counts: Vec<u64> = (0..len)
                .map(|i| if i == 0 { 1 + rng.next_u64() % 5 } else { rng.next_u64() % 1000 })
                .collect();
            let h = hist(&counts);
            let b = beta((case as f64) * 0.05);
            let p = h.probabilities(b).unwrap();
            let sampler = GibbsSampler::new(&h, b).unwrap();
            let n = 100_000;
            let mut freq = vec![0.0; len];
            for _ in 0..n {
                freq[sampler.sample(&mut rng) as usize] += 1.0 / n as f64;
            }
            let tv: f64 = 0.5 * p.iter().zip(&freq).map(|(a, b)| (a - b).abs()).sum::<f64>();
            assert!(tv <= 0.01, "case {case}: tv = {tv}");
        }
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let dir = std::env::temp_dir().join(format!("gibbs-anneal-hist-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let good = dir.join("good.json");
        std::fs::write(&good, hist(&[1, 3, 1, 0]).to_json()).unwrap();
        assert_eq!(HamiltonianHistogram::load(&good).unwrap(), hist(&[1, 3, 1, 0]));
        let neg = dir.join("neg.json");
        std::fs::write(&neg, r#"{"counts": [1, -1]}"#).unwrap();
        assert!(matches!(HamiltonianHistogram::load(&neg), Err(Error::InvalidHistogram(_))));
        let zero = dir.join("zero.json");
        std::fs::write(&zero, r#"{"counts": [0, 0]}"#).unwrap();
        assert!(matches!(HamiltonianHistogram::load(&zero), Err(Error::InvalidHistogram(_))));
        let junk = dir.join("junk.json");
        std::fs::write(&junk, r#"{"count": [1]}"#).unwrap();
        assert!(matches!(HamiltonianHistogram::load(&junk), Err(Error::Json { .. })));
    }

    fn arb_histogram() -> impl Strategy<Value = HamiltonianHistogram> {
        (1u64..50, prop::collection::vec(0u64..2000, 2..64)).prop_map(|(c0, mut rest)| {
            rest.insert(0, c0);
            HamiltonianHistogram::new(rest).unwrap()
        })
    }

    proptest! {
        #[test]
        fn z_is_decreasing_and_convex(h in arb_histogram(), b1 in 0.0f64..5.0, d1 in 1e-3f64..2.0, d2 in 1e-3f64..2.0) {
            let (b2, b3) = (b1 + d1, b1 + d1 + d2);
            let z1 = h.log_z(beta(b1)).unwrap();
            let z2 = h.log_z(beta(b2)).unwrap();
            let z3 = h.log_z(beta(b3)).unwrap();
            let tol = 1e-8 * z1.abs().max(1.0);
            prop_assert!(z1 + tol >= z2 && z2 + tol >= z3);
            let s12 = (z2 - z1) / d1;
            let s23 = (z3 - z2) / d2;
            prop_assert!(s23 >= s12 - 1e-8 * s12.abs().max(1.0), "s12 {s12} s23 {s23}");
        }

        #[test]
        fn derivative_matches_finite_difference(h in arb_histogram(), b in 1e-3f64..4.0) {
            let d = 1e-4;
            let fd = (h.log_z(beta(b + d)).unwrap() - h.log_z(beta(b - d)).unwrap()) / (2.0 * d);
            let exact = h.log_z_derivative(beta(b)).unwrap();
            prop_assert!((exact - fd).abs() <= 1e-4, "exact {exact} fd {fd}");
            let hmax = h.max_hamiltonian() as f64;
            prop_assert!(exact <= 0.0 && exact >= -hmax);
            prop_assert!(h.log_z_second_derivative(beta(b)).unwrap() >= 0.0);
        }

        #[test]
        fn derivative_ratio_inequality(h in arb_histogram(), b1 in 0.0f64..3.0, gap in 1e-3f64..3.0) {
            let b2 = b1 + gap;
            let z1 = h.log_z(beta(b1)).unwrap();
            let z2 = h.log_z(beta(b2)).unwrap();
            prop_assume!(z1 - z2 >= 1e-12);
            let zm = h.log_z(beta((b1 + b2) / 2.0)).unwrap();
            let kappa = z1 + z2 - 2.0 * zm;
            let lhs = h.log_z_derivative(beta(b1)).unwrap() / h.log_z_derivative(beta(b2)).unwrap();
            prop_assert!(lhs >= (2.0 * kappa / (z1 - z2)).exp() - 1e-9);
        }
    }
}
