//! Discrete Fourier synthesis on centered periodic grids.
//!
//! Momentum nodes are `p_k = (k - M/2) Δp` and coordinate nodes
//! `x_j = (j - M/2) Δx` with `Δp Δx = 2πħ / M`. Under that pairing the
//! trapezoidal rule for `ψ(x) = ∫ c(p) e^{ipx/ħ} dp` is exactly a DFT with
//! alternating-sign twiddles, which is what this module implements.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub(crate) struct Transform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl Transform {
    pub(crate) fn new(len: usize) -> Result<Self> {
        check_len(len)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        })
    }

    /// `ψ_j = Δp Σ_k c_k e^{2πi (k - M/2)(j - M/2) / M}`.
    pub(crate) fn synthesize(&self, spectrum: &[Complex64], dp: f64) -> Vec<Complex64> {
        debug_assert_eq!(spectrum.len(), self.len);
        let mut buf: Vec<Complex64> = spectrum
            .iter()
            .enumerate()
            .map(|(k, &c)| alternate(k) * c)
            .collect();
        self.inverse.process(&mut buf);
        let scale = dp * half_len_sign(self.len);
        buf.iter_mut()
            .enumerate()
            .for_each(|(j, v)| *v *= scale * alternate(j));
        buf
    }

    /// Unnormalized inverse DFT `y_r = Σ_d b_d e^{2πi dr/n}`, in place.
    pub(crate) fn inverse_raw(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }

    /// Inverse of [`Transform::synthesize`].
    pub(crate) fn analyze(&self, values: &[Complex64], dp: f64) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.len);
        let mut buf: Vec<Complex64> = values
            .iter()
            .enumerate()
            .map(|(j, &v)| alternate(j) * v)
            .collect();
        self.forward.process(&mut buf);
        let scale = half_len_sign(self.len) / (dp * self.len as f64);
        buf.iter_mut()
            .enumerate()
            .for_each(|(k, c)| *c *= scale * alternate(k));
        buf
    }
}

fn check_len(len: usize) -> Result<()> {
    if len < 2 || !len.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "grid size must be even and at least 2, got {len}"
        )));
    }
    Ok(())
}

fn alternate(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `e^{iπM/2} = (-1)^{M/2}` for even M.
fn half_len_sign(len: usize) -> f64 {
    alternate(len / 2)
}

/// Centered node offsets `(k - M/2)` as floats.
pub(crate) fn centered_offsets(len: usize) -> impl Iterator<Item = f64> {
    let half = (len / 2) as f64;
    (0..len).map(move |k| k as f64 - half)
}

/// Embeds a centered spectrum of length M into one of length `new_len ≥ M`.
pub(crate) fn pad_centered(spectrum: &[Complex64], new_len: usize) -> Vec<Complex64> {
    let shift = (new_len - spectrum.len()) / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); new_len];
    out[shift..shift + spectrum.len()].copy_from_slice(spectrum);
    out
}

/// Spectral derivative of periodic samples with spacing `dx`. The Nyquist
/// mode is dropped, as its derivative is not representable.
pub(crate) fn periodic_derivative(values: &[Complex64], dx: f64) -> Result<Vec<Complex64>> {
    let n = values.len();
    let transform = Transform::new(n)?;
    // Treat x as the "momentum" of a unit-ħ transform pair with Δk = 2π/(n dx).
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    let pseudo_dp = dx;
    let mut coeffs = transform.analyze(values, pseudo_dp);
    for (c, offset) in coeffs.iter_mut().zip(centered_offsets(n)) {
        if offset == -((n / 2) as f64) {
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c *= Complex64::new(0.0, offset * dk);
        }
    }
    Ok(transform.synthesize(&coeffs, pseudo_dp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn synthesis_matches_direct_sum() {
        let m = 8;
        let dp = 0.3;
        let spectrum: Vec<_> = (0..m).map(|k| c(k as f64 * 0.1, 1.0 - k as f64 * 0.05)).collect();
        let t = Transform::new(m).unwrap();
        let psi = t.synthesize(&spectrum, dp);
        let hbar = 1.7;
        let dx = 2.0 * PI * hbar / (m as f64 * dp);
        for (j, xj) in centered_offsets(m).enumerate() {
            let x = xj * dx;
            let direct: Complex64 = spectrum
                .iter()
                .zip(centered_offsets(m))
                .map(|(ck, pk)| ck * Complex64::from_polar(1.0, pk * dp * x / hbar))
                .sum::<Complex64>()
                * dp;
            assert!((direct - psi[j]).norm() < 1e-13, "{j}: {direct} vs {}", psi[j]);
        }
    }

    #[test]
    fn round_trip() {
        let m = 12;
        let spectrum: Vec<_> = (0..m).map(|k| c((k * k) as f64, -(k as f64))).collect();
        let t = Transform::new(m).unwrap();
        let back = t.analyze(&t.synthesize(&spectrum, 0.7), 0.7);
        for (a, b) in spectrum.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn odd_lengths_are_rejected() {
        assert!(Transform::new(7).is_err());
        assert!(Transform::new(0).is_err());
    }

    #[test]
    fn padding_keeps_coarse_samples() {
        let m = 8;
        let dp = 0.5;
        let spectrum: Vec<_> = (0..m).map(|k| c(1.0 / (1.0 + k as f64), 0.2)).collect();
        let coarse = Transform::new(m).unwrap().synthesize(&spectrum, dp);
        let fine = Transform::new(2 * m)
            .unwrap()
            .synthesize(&pad_centered(&spectrum, 2 * m), dp);
        for j in 0..m {
            assert!((coarse[j] - fine[2 * j]).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let n = 32;
        let dx = 2.0 * PI / n as f64;
        let values: Vec<_> = centered_offsets(n).map(|o| c((3.0 * o * dx).sin(), 0.0)).collect();
        let d = periodic_derivative(&values, dx).unwrap();
        for (v, o) in d.iter().zip(centered_offsets(n)) {
            assert!((v.re - 3.0 * (3.0 * o * dx).cos()).abs() < 1e-12);
            assert!(v.im.abs() < 1e-12);
        }
    }
}
