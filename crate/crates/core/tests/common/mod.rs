//! Reference implementations used only by tests. None of these call into
//! the library's kernels, transforms or series code.
#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

/// `T(p) = tan²(√β p) / (2mβ)`.
pub fn kempf_t(beta: f64, mass: f64, p: f64) -> f64 {
    let t = (beta.sqrt() * p).tan();
    t * t / (2.0 * mass * beta)
}

/// `T'(p) = tan(√β p) sec²(√β p) / (m√β)`.
pub fn kempf_t_prime(beta: f64, mass: f64, p: f64) -> f64 {
    let u = beta.sqrt() * p;
    u.tan() / (u.cos() * u.cos() * mass * beta.sqrt())
}

/// Plain difference quotient with the analytic diagonal.
pub fn kempf_kernel(beta: f64, mass: f64, p: f64, q: f64) -> f64 {
    if p == q {
        kempf_t_prime(beta, mass, p)
    } else {
        (kempf_t(beta, mass, p) - kempf_t(beta, mass, q)) / (p - q)
    }
}

pub fn free_kernel(mass: f64, p: f64, q: f64) -> f64 {
    (p + q) / (2.0 * mass)
}

/// `j(x) = Δp² Σ_p Σ_q c(p) c*(q) K(p,q) e^{i(p-q)x/ħ}`, every pair and every
/// point visited explicitly.
pub fn naive_closed_flux(
    values: &[Complex64],
    nodes: &[f64],
    dp: f64,
    hbar: f64,
    xs: &[f64],
    kernel: impl Fn(f64, f64) -> f64,
) -> Vec<Complex64> {
    xs.iter()
        .map(|&x| {
            let mut sum = Complex64::new(0.0, 0.0);
            for (cp, &p) in values.iter().zip(nodes) {
                for (cq, &q) in values.iter().zip(nodes) {
                    sum += cp * cq.conj() * kernel(p, q) * Complex64::cis((p - q) * x / hbar);
                }
            }
            sum * dp * dp
        })
        .collect()
}

/// `ψ(x)` of the packet `c(p) = N e^{-(p-p̄)²/2σ²} e^{-ipx₀/ħ}` integrated over
/// the whole line, with `N = (2πħσ√π)^{-1/2}`.
pub fn gaussian_psi(center: f64, sigma: f64, x0: f64, hbar: f64, x: f64) -> Complex64 {
    let n = (2.0 * PI * hbar * sigma * PI.sqrt()).powf(-0.5);
    let y = x - x0;
    let envelope = n * sigma * (2.0 * PI).sqrt() * (-(sigma * y / hbar).powi(2) / 2.0).exp();
    Complex64::from_polar(envelope, center * y / hbar)
}

/// `∂ψ/∂x` of [`gaussian_psi`].
pub fn gaussian_dpsi(center: f64, sigma: f64, x0: f64, hbar: f64, x: f64) -> Complex64 {
    let y = x - x0;
    gaussian_psi(center, sigma, x0, hbar, x)
        * Complex64::new(-sigma * sigma * y / (hbar * hbar), center / hbar)
}

/// Composite Gauss–Legendre (5 point) quadrature of `f` on `[a, b]`.
pub fn quad(a: f64, b: f64, panels: usize, f: impl Fn(f64) -> Complex64) -> Complex64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            sum += f(mid + 0.5 * h * x) * w;
        }
    }
    sum * 0.5 * h
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let (upper, lower) = a.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= f * src;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Coefficients `a_n` of `tan²u = Σ a_n u^{2n}` from an interpolating
/// polynomial of `g(s) = tan²(√s)/s` on Chebyshev nodes around 0, using
/// `tanh` for `s < 0`.
pub fn tan_sq_coeffs_by_fit(count: usize) -> Vec<f64> {
    let nodes = 12;
    let h = 0.3;
    let g = |s: f64| {
        if s > 0.0 {
            s.sqrt().tan().powi(2) / s
        } else {
            (-s).sqrt().tanh().powi(2) / -s
        }
    };
    let ts: Vec<f64> = (0..nodes)
        .map(|i| ((i as f64 + 0.5) * PI / nodes as f64).cos())
        .collect();
    let a: Vec<Vec<f64>> = ts.iter().map(|t| (0..nodes).map(|k| t.powi(k)).collect()).collect();
    let b: Vec<f64> = ts.iter().map(|t| g(h * t)).collect();
    let poly = solve(a, b);
    (0..count).map(|k| poly[k] / h.powi(k as i32)).collect()
}

/// Central difference `T'(p)` by Richardson extrapolation.
pub fn richardson_derivative(f: impl Fn(f64) -> f64, p: f64, h: f64) -> f64 {
    let d = |h: f64| (f(p + h) - f(p - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Two-wave current written out term by term: `|A|²T'(p₁) + |B|²T'(p₂)
/// + (ΔT/Δp) 2|A||B| cos(Δp x/ħ - ΔT t/ħ + Δφ)`.
#[allow(clippy::too_many_arguments)]
pub fn two_wave_current(
    t_of: impl Fn(f64) -> f64,
    t_prime: impl Fn(f64) -> f64,
    a: Complex64,
    p1: f64,
    b: Complex64,
    p2: f64,
    hbar: f64,
    t: f64,
    x: f64,
) -> f64 {
    let dt = t_of(p1) - t_of(p2);
    let dp = p1 - p2;
    let dphi = a.arg() - b.arg();
    a.norm_sqr() * t_prime(p1)
        + b.norm_sqr() * t_prime(p2)
        + dt / dp * 2.0 * a.norm() * b.norm() * (dp * x / hbar - dt * t / hbar + dphi).cos()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
