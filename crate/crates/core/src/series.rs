//! Truncated real power series.
//!
//! Only what the kinetic-energy expansion needs: Cauchy products, Horner
//! evaluation, term-wise differentiation and the Taylor coefficients of
//! `tan`.

use std::ops::Mul;

/// Power series `Σ c_k x^k` truncated after `len()` terms.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<f64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Expands an odd series given by its odd-order coefficients
    /// `[c1, c3, c5, ...]` into a dense coefficient list.
    pub fn from_odd(odd: &[f64]) -> Self {
        let mut coeffs = vec![0.0; 2 * odd.len()];
        for (k, &c) in odd.iter().enumerate() {
            coeffs[2 * k + 1] = c;
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients of odd order, `[c1, c3, ...]`.
    pub fn odd_part(&self) -> Vec<f64> {
        self.coeffs.iter().skip(1).step_by(2).copied().collect()
    }

    /// Coefficients of even order, `[c0, c2, ...]`.
    pub fn even_part(&self) -> Vec<f64> {
        self.coeffs.iter().step_by(2).copied().collect()
    }

    pub fn truncated(mut self, len: usize) -> Self {
        self.coeffs.truncate(len);
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Self { coeffs }
    }

    /// Product truncated to `len` terms.
    pub fn mul_truncated(&self, other: &Self, len: usize) -> Self {
        Self {
            coeffs: cauchy_product(&self.coeffs, &other.coeffs, len),
        }
    }
}

impl Mul for &PowerSeries {
    type Output = PowerSeries;

    /// Product truncated to the shorter operand's length.
    fn mul(self, rhs: &PowerSeries) -> PowerSeries {
        let len = self.len().min(rhs.len());
        self.mul_truncated(rhs, len)
    }
}

/// First `len` coefficients of the Cauchy product of two coefficient lists.
pub fn cauchy_product(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| {
            let lo = n.saturating_sub(b.len().saturating_sub(1));
            let hi = n.min(a.len().saturating_sub(1));
            if a.is_empty() || b.is_empty() || lo > hi {
                return 0.0;
            }
            (lo..=hi).map(|i| a[i] * b[n - i]).sum()
        })
        .collect()
}

/// Taylor coefficients of `tan x` at 0, `len` dense terms.
///
/// Built from `tan' = 1 + tan²`, i.e. `(k+1) t_{k+1} = [k = 0] + Σ_{i+j=k} t_i t_j`.
pub fn tan_series(len: usize) -> PowerSeries {
    let mut t = vec![0.0; len];
    for k in 0..len.saturating_sub(1) {
        let square: f64 = (0..=k).map(|i| t[i] * t[k - i]).sum();
        let rhs = if k == 0 { 1.0 + square } else { square };
        t[k + 1] = rhs / (k + 1) as f64;
    }
    PowerSeries::new(t)
}

/// Odd-order Taylor coefficients `[1, 1/3, 2/15, ...]` of `tan`.
pub fn tan_odd_coeffs(count: usize) -> Vec<f64> {
    tan_series(2 * count).odd_part()
}
