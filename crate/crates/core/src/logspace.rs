//! Log-space arithmetic for quantities that span `e^{±700}` and beyond.

use std::ops::{Div, Mul};

use serde::{Deserialize, Serialize};

/// A non-negative real stored as its natural logarithm.
///
/// Exact zero is `ln = -inf`. Products and quotients are sums and
/// differences of logs; sums go through [`log_add_exp`], which shifts by the
/// larger operand before exponentiating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    ln: f64,
}

impl LogValue {
    pub const ZERO: Self = Self { ln: f64::NEG_INFINITY };
    pub const ONE: Self = Self { ln: 0.0 };

    #[inline]
    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        Self { ln }
    }

    /// Panics in debug builds on a negative or NaN input.
    #[inline]
    pub fn from_linear(x: f64) -> Self {
        debug_assert!(x >= 0.0, "LogValue of negative {x}");
        Self { ln: x.ln() }
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.ln
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    #[inline]
    pub fn linear(self) -> f64 {
        self.ln.exp()
    }

    #[inline]
    pub fn add(self, other: Self) -> Self {
        Self { ln: log_add_exp(self.ln, other.ln) }
    }

    pub fn sum<I: IntoIterator<Item = Self>>(values: I) -> Self {
        let logs: Vec<f64> = values.into_iter().map(|v| v.ln).collect();
        Self { ln: log_sum_exp(&logs) }
    }
}

impl Mul for LogValue {
    type Output = Self;

    #[inline]
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        Self { ln: self.ln + rhs.ln }
    }
}

impl Div for LogValue {
    type Output = Self;

    #[inline]
    fn div(self, rhs: Self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        Self { ln: self.ln - rhs.ln }
    }
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    if hi == f64::INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^{x_i}` with a single max shift. Empty input gives `-inf`.
pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    let s: f64 = logs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}
