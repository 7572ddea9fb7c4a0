//! Probability current `j(x)` for deformed kinetic energies.
//!
//! Three evaluation routes are provided:
//!
//! * the coordinate-space series
//!   `j = (1/2m) Σₙ aₙ β^{n-1} Σ_{k=1}^{n} (-1)^{k-1} [(p̂^{k-1}ψ*)(p̂^{2n-k}ψ) - (p̂^{k-1}ψ)(p̂^{2n-k}ψ*)]`,
//!   truncated at order N and evaluated with exact spectral derivatives;
//! * the closed momentum-space form
//!   `j = ∫∫ c(p) c*(q) [(T(p) - T(q))/(p - q)] e^{i(p-q)x/ħ} dp dq`
//!   on a [`GridState`], or as a finite pair sum on a [`SpectralState`];
//! * the plane-wave special case `j = |A|² T'(p₀)`.
//!
//! Complex intermediate results are checked for a negligible imaginary part
//! before being reduced to real profiles.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{DeformationSpec, KernelNode, KineticCoefficients};
use crate::error::{Error, Result};
use crate::evolution::FreeEvolution;
use crate::spectral::Transform;
use crate::states::{CoordinateGrid, CoordinateState, GridState, MomentumGrid, SpectralState};

/// Largest tolerated imaginary residue, relative to the profile scale.
pub const REALITY_TOLERANCE: f64 = 1e-10;

/// Default truncation order of the series form.
pub const DEFAULT_SERIES_ORDER: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxMethod {
    Series,
    ClosedGrid,
    ClosedSpectral,
    Analytic,
}

impl FluxMethod {
    pub fn name(&self) -> &'static str {
        match self {
            FluxMethod::Series => "series",
            FluxMethod::ClosedGrid => "closed-grid",
            FluxMethod::ClosedSpectral => "closed-spectral",
            FluxMethod::Analytic => "analytic",
        }
    }
}

/// `j(x)` on a set of coordinate points.
#[derive(Clone, Debug, PartialEq)]
pub struct FluxProfile {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub method: FluxMethod,
    /// Series truncation order, `None` for closed forms.
    pub order: Option<usize>,
    pub time: f64,
    pub max_imag_residue: f64,
    pub truncation_estimate: Option<f64>,
}

impl FluxProfile {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Label such as `series-N16` or `closed-grid`.
    pub fn label(&self) -> String {
        match self.order {
            Some(n) => format!("{}-N{n}", self.method.name()),
            None => self.method.name().to_string(),
        }
    }

    /// `max |self - other|` over common points.
    pub fn max_abs_difference(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Splits a complex profile into its real part after checking that the
/// imaginary part is below `REALITY_TOLERANCE · max(max|re|, scale)`.
pub(crate) fn checked_real(values: &[Complex64], scale: f64, what: &str) -> Result<(Vec<f64>, f64)> {
    let max_re = values.iter().fold(0.0_f64, |m, v| m.max(v.re.abs()));
    let residue = values.iter().fold(0.0_f64, |m, v| m.max(v.im.abs()));
    let bound = REALITY_TOLERANCE * max_re.max(scale);
    if residue > bound || residue.is_nan() {
        return Err(Error::NumericalHealth(format!(
            "{what}: imaginary residue {residue:.3e} exceeds {bound:.3e}"
        )));
    }
    Ok((values.iter().map(|v| v.re).collect(), residue))
}

fn check_order(coeffs: &KineticCoefficients, order: usize) -> Result<()> {
    if order == 0 {
        return Err(Error::InvalidArgument("series order must be at least 1".into()));
    }
    if order > coeffs.order() {
        return Err(Error::Order {
            requested: order,
            available: coeffs.order(),
        });
    }
    Ok(())
}

/// Series flux from stacks `d[j] = p̂^j ψ` and `e[j] = p̂^j ψ*`, j < 2N.
pub(crate) fn series_flux_from_stacks(
    d: &[Vec<Complex64>],
    e: &[Vec<Complex64>],
    coeffs: &KineticCoefficients,
    order: usize,
    spec: &DeformationSpec,
) -> Vec<Complex64> {
    let len = d[0].len();
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for n in 1..=order {
        let weight = coeffs.a(n) * spec.beta().powi(n as i32 - 1) / (2.0 * spec.mass());
        if weight == 0.0 {
            continue;
        }
        for k in 1..=n {
            let sign = if k % 2 == 1 { weight } else { -weight };
            let (lo, hi) = (k - 1, 2 * n - k);
            for (i, o) in out.iter_mut().enumerate() {
                *o += sign * (e[lo][i] * d[hi][i] - d[lo][i] * e[hi][i]);
            }
        }
    }
    out
}

/// `∂ₓ` of the series flux, using `∂ₓ p̂^j ψ = (i/ħ) p̂^{j+1} ψ`; stacks
/// must reach order 2N.
pub(crate) fn series_flux_gradient_from_stacks(
    d: &[Vec<Complex64>],
    e: &[Vec<Complex64>],
    coeffs: &KineticCoefficients,
    order: usize,
    spec: &DeformationSpec,
) -> Vec<Complex64> {
    let len = d[0].len();
    let i_over_hbar = Complex64::new(0.0, 1.0 / spec.hbar());
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for n in 1..=order {
        let weight = coeffs.a(n) * spec.beta().powi(n as i32 - 1) / (2.0 * spec.mass());
        if weight == 0.0 {
            continue;
        }
        for k in 1..=n {
            let sign = if k % 2 == 1 { weight } else { -weight };
            let (lo, hi) = (k - 1, 2 * n - k);
            for (i, o) in out.iter_mut().enumerate() {
                let term = e[lo + 1][i] * d[hi][i] + e[lo][i] * d[hi + 1][i]
                    - d[lo + 1][i] * e[hi][i]
                    - d[lo][i] * e[hi + 1][i];
                *o += sign * i_over_hbar * term;
            }
        }
    }
    out
}

/// `(1/2m)|a_N| β^{N-1} 2N P^{2N-1} W²`, the bound on the last retained
/// series term for a state with momenta `|p| ≤ P` and `max|ψ| ≤ W`.
/// Zero when the omitted coefficients vanish identically.
pub fn series_truncation_estimate(
    spec: &DeformationSpec,
    coeffs: &KineticCoefficients,
    order: usize,
    p_max: f64,
    amplitude_bound: f64,
) -> f64 {
    if spec.is_undeformed() {
        return 0.0;
    }
    let n = order as i32;
    (coeffs.a(order) * spec.beta().powi(n - 1) * 2.0 * order as f64 * p_max.powi(2 * n - 1)).abs()
        / (2.0 * spec.mass())
        * amplitude_bound
        * amplitude_bound
}

/// Largest `|p|` carrying more than roundoff-level amplitude; an oversampled
/// state is padded with (numerically) empty modes that must not count.
fn occupied_support(spectrum: &[Complex64], nodes: &[f64]) -> f64 {
    let peak = spectrum.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    spectrum
        .iter()
        .zip(nodes)
        .filter(|(c, _)| c.norm() > 1e-13 * peak)
        .fold(0.0_f64, |m, (_, p)| m.max(p.abs()))
}

/// Truncated series flux of a sampled band-limited state.
pub fn flux_series(
    psi: &CoordinateState,
    coeffs: &KineticCoefficients,
    order: usize,
) -> Result<FluxProfile> {
    check_order(coeffs, order)?;
    let spec = psi.spec();
    let d = psi.derivative_stack(2 * order - 1)?;
    let e = psi.conj().derivative_stack(2 * order - 1)?;
    let complex = series_flux_from_stacks(&d, &e, coeffs, order, spec);

    let band = psi.band_limit();
    let momentum = psi.momentum_values()?;
    let mgrid = psi.grid().momentum_grid(spec.hbar());
    let dp = mgrid.spacing();
    let amplitude_bound = momentum.iter().map(|c| c.norm()).sum::<f64>() * dp;
    let support = occupied_support(&momentum, &mgrid.nodes());
    let peak = psi.density().iter().fold(0.0_f64, |m, &r| m.max(r));
    let (values, residue) = checked_real(&complex, peak * band / spec.mass(), "series flux")?;
    Ok(FluxProfile {
        x: psi.x(),
        values,
        method: FluxMethod::Series,
        order: Some(order),
        time: psi.time(),
        max_imag_residue: residue,
        truncation_estimate: Some(series_truncation_estimate(
            spec,
            coeffs,
            order,
            support,
            amplitude_bound,
        )),
    })
}

/// `[p̂^j ψ]` and `[p̂^j ψ*]` for `j ≤ max_order` at the points `xs`.
pub(crate) fn spectral_stacks(
    state: &SpectralState,
    xs: &[f64],
    max_order: usize,
) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
    let hbar = state.spec().hbar();
    let mut d = vec![vec![Complex64::new(0.0, 0.0); xs.len()]; max_order + 1];
    let mut e = d.clone();
    for c in state.components() {
        for (i, &x) in xs.iter().enumerate() {
            let wave = c.amplitude * Complex64::cis(c.p * x / hbar);
            let conj_wave = wave.conj();
            let mut pk = 1.0;
            for j in 0..=max_order {
                d[j][i] += wave * pk;
                // p̂ acting on e^{-ipx/ħ} brings down -p
                e[j][i] += conj_wave * if j % 2 == 0 { pk } else { -pk };
                pk *= c.p;
            }
        }
    }
    (d, e)
}

/// Truncated series flux of an exact plane-wave superposition.
pub fn flux_series_spectral(
    state: &SpectralState,
    xs: &[f64],
    coeffs: &KineticCoefficients,
    order: usize,
) -> Result<FluxProfile> {
    check_order(coeffs, order)?;
    let spec = state.spec();
    let (d, e) = spectral_stacks(state, xs, 2 * order - 1);
    let complex = series_flux_from_stacks(&d, &e, coeffs, order, spec);
    let w: f64 = state.components().iter().map(|c| c.amplitude.norm()).sum();
    let p_max = state.max_abs_momentum();
    let (values, residue) = checked_real(&complex, w * w * p_max / spec.mass(), "series flux")?;
    Ok(FluxProfile {
        x: xs.to_vec(),
        values,
        method: FluxMethod::Series,
        order: Some(order),
        time: state.time(),
        max_imag_residue: residue,
        truncation_estimate: Some(series_truncation_estimate(spec, coeffs, order, p_max, w)),
    })
}

/// Evaluator of the closed double integral for states on one momentum grid.
///
/// Writing `p_k - p_l = dΔp`, the integrand only depends on `x` through
/// `e^{idΔp x/ħ}`, so `j(x) = Σ_d g_d e^{idΔp x/ħ}` with
/// `g_d = Δp² Σ_l c_{l+d} c*_l K(p_{l+d}, p_l)` and `g_{-d} = g_d*`.
/// Only the `M` coefficients with `d ≥ 0` (pairs with `p ≥ q`) are formed.
#[derive(Clone, Debug)]
pub struct ClosedGridFlux {
    spec: Arc<DeformationSpec>,
    grid: MomentumGrid,
    nodes: Vec<KernelNode>,
}

impl ClosedGridFlux {
    pub fn new(spec: Arc<DeformationSpec>, grid: MomentumGrid) -> Result<Self> {
        let nodes = grid
            .nodes()
            .into_iter()
            .map(|p| spec.kernel_node(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, grid, nodes })
    }

    pub fn spec(&self) -> &Arc<DeformationSpec> {
        &self.spec
    }

    fn check_state(&self, state: &GridState) -> Result<()> {
        if !Arc::ptr_eq(state.spec(), &self.spec) && **state.spec() != *self.spec {
            return Err(Error::SpecMismatch);
        }
        if state.grid() != self.grid {
            return Err(Error::InvalidGrid(
                "state grid differs from the evaluator's grid".into(),
            ));
        }
        Ok(())
    }

    /// Difference-frequency coefficients `g_0 .. g_{M-1}`.
    pub fn difference_spectrum(&self, state: &GridState) -> Result<Vec<Complex64>> {
        self.check_state(state)?;
        let c = state.values();
        let m = c.len();
        let dp = self.grid.spacing();
        let w = dp * dp;
        Ok((0..m)
            .into_par_iter()
            .map(|d| {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..m - d {
                    let k = self.spec.kernel_pair(&self.nodes[l + d], &self.nodes[l]);
                    acc += c[l + d] * c[l].conj() * k;
                }
                acc * w
            })
            .collect())
    }

    fn scale(&self, state: &GridState) -> f64 {
        let w = state.amplitude_bound();
        let vmax = self.nodes.iter().fold(0.0_f64, |m, n| m.max(n.derivative().abs()));
        w * w * vmax
    }

    /// `j` at arbitrary points, by direct synthesis of the difference spectrum.
    pub fn evaluate(&self, state: &GridState, xs: &[f64]) -> Result<FluxProfile> {
        let g = self.difference_spectrum(state)?;
        let dp = self.grid.spacing();
        let hbar = self.spec.hbar();
        let complex: Vec<Complex64> = xs
            .par_iter()
            .map(|&x| {
                let mut z = g[0];
                for (d, gd) in g.iter().enumerate().skip(1) {
                    let phase = Complex64::cis(d as f64 * dp * x / hbar);
                    z += gd * phase + gd.conj() * phase.conj();
                }
                z
            })
            .collect();
        let (values, residue) = checked_real(&complex, self.scale(state), "closed-grid flux")?;
        Ok(FluxProfile {
            x: xs.to_vec(),
            values,
            method: FluxMethod::ClosedGrid,
            order: None,
            time: state.time(),
            max_imag_residue: residue,
            truncation_estimate: None,
        })
    }

    /// The grid `2M` points with `Δx = πħ/(2 b_eff)`, which resolves the full
    /// `2 b_eff` bandwidth of `j` over the state's period.
    pub fn fine_grid(&self) -> CoordinateGrid {
        MomentumGrid::new(2 * self.grid.len(), 2.0 * self.grid.b_eff())
            .expect("doubling a valid grid stays valid")
            .coordinate_grid(self.spec.hbar())
    }

    /// `j` on [`ClosedGridFlux::fine_grid`] via one inverse FFT.
    pub fn evaluate_fine(&self, state: &GridState) -> Result<FluxProfile> {
        let g = self.difference_spectrum(state)?;
        let m = g.len();
        let n = 2 * m;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (d, gd) in g.iter().enumerate() {
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            buf[d] += gd * sign;
            if d > 0 {
                buf[n - d] += gd.conj() * sign;
            }
        }
        Transform::new(n)?.inverse_raw(&mut buf);
        let (values, residue) = checked_real(&buf, self.scale(state), "closed-grid flux")?;
        Ok(FluxProfile {
            x: self.fine_grid().nodes(),
            values,
            method: FluxMethod::ClosedGrid,
            order: None,
            time: state.time(),
            max_imag_residue: residue,
            truncation_estimate: None,
        })
    }
}

/// Closed-form flux of a grid state at arbitrary points.
pub fn flux_closed_grid(c: &GridState, xs: &[f64]) -> Result<FluxProfile> {
    ClosedGridFlux::new(Arc::clone(c.spec()), c.grid())?.evaluate(c, xs)
}

/// Closed-form flux of a grid state on its fine residual grid.
pub fn flux_closed_grid_fine(c: &GridState) -> Result<FluxProfile> {
    ClosedGridFlux::new(Arc::clone(c.spec()), c.grid())?.evaluate_fine(c)
}

struct PairTerm {
    dp: f64,
    weight: Complex64,
    kernel: f64,
}

fn spectral_terms(state: &SpectralState) -> Result<(f64, Vec<PairTerm>)> {
    let spec = state.spec();
    let nodes = state
        .components()
        .iter()
        .map(|c| spec.kernel_node(c.p))
        .collect::<Result<Vec<_>>>()?;
    let comps = state.components();
    let mut constant = 0.0;
    let mut pairs = Vec::new();
    for (i, ci) in comps.iter().enumerate() {
        constant += ci.amplitude.norm_sqr() * nodes[i].derivative();
        for (j, cj) in comps.iter().enumerate().skip(i + 1) {
            pairs.push(PairTerm {
                dp: ci.p - cj.p,
                weight: ci.amplitude * cj.amplitude.conj(),
                kernel: spec.kernel_pair(&nodes[i], &nodes[j]),
            });
        }
    }
    Ok((constant, pairs))
}

/// Exact flux of a plane-wave superposition at time `t`:
/// `Σ|A_i|² T'(p_i) + Σ_{i<j} K(p_i, p_j) 2|A_i||A_j| cos(Δp x/ħ - ΔT t/ħ + Δφ)`.
pub fn flux_closed_spectral(state: &SpectralState, xs: &[f64], t: f64) -> Result<FluxProfile> {
    let state = state.evolve_free(t - state.time())?;
    let hbar = state.spec().hbar();
    let (constant, pairs) = spectral_terms(&state)?;
    let values = xs
        .iter()
        .map(|&x| {
            constant
                + pairs
                    .iter()
                    .map(|pt| pt.kernel * 2.0 * (pt.weight * Complex64::cis(pt.dp * x / hbar)).re)
                    .sum::<f64>()
        })
        .collect();
    Ok(FluxProfile {
        x: xs.to_vec(),
        values,
        method: FluxMethod::ClosedSpectral,
        order: None,
        time: t,
        max_imag_residue: 0.0,
        truncation_estimate: None,
    })
}

/// `∂j/∂x` of [`flux_closed_spectral`], differentiated term by term.
pub fn flux_closed_spectral_gradient(state: &SpectralState, xs: &[f64], t: f64) -> Result<Vec<f64>> {
    let state = state.evolve_free(t - state.time())?;
    let hbar = state.spec().hbar();
    let (_, pairs) = spectral_terms(&state)?;
    Ok(xs
        .iter()
        .map(|&x| {
            pairs
                .iter()
                .map(|pt| {
                    let z = pt.weight * Complex64::cis(pt.dp * x / hbar);
                    -pt.kernel * 2.0 * (pt.dp / hbar) * z.im
                })
                .sum()
        })
        .collect())
}

/// `|A|² T'(p₀)`, the current of a single plane wave.
pub fn flux_plane_wave(spec: &DeformationSpec, amplitude: Complex64, p0: f64) -> Result<f64> {
    Ok(amplitude.norm_sqr() * spec.kinetic_derivative(p0)?)
}

/// Both sides of `Σ_{k=1}^{n} [q^{k-1} p^{2n-k} + p^{k-1} q^{2n-k}] = (p^{2n} - q^{2n})/(p - q)`.
///
/// On (or numerically at) the diagonal the quotient is replaced by its limit
/// `2n p^{2n-1}`.
pub fn geometric_sum_identity(p: f64, q: f64, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let lhs: f64 = (1..=n)
        .map(|k| {
            q.powi(k as i32 - 1) * p.powi((2 * n - k) as i32)
                + p.powi(k as i32 - 1) * q.powi((2 * n - k) as i32)
        })
        .sum();
    let two_n = 2 * n as i32;
    let scale = 1.0_f64.max(p.abs()).max(q.abs());
    let rhs = if (p - q).abs() <= 1e-12 * scale {
        let mid = 0.5 * (p + q);
        two_n as f64 * mid.powi(two_n - 1)
    } else {
        (p.powi(two_n) - q.powi(two_n)) / (p - q)
    };
    Ok((lhs, rhs))
}
