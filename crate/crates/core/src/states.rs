//! Momentum- and coordinate-space representations of one-particle states.
//!
//! * [`SpectralState`]: a finite superposition of exact plane waves.
//! * [`GridState`]: momentum amplitudes `c(p)` sampled on a periodic grid
//!   over `[-b_eff, b_eff]`, integrated with the trapezoidal rule.
//! * [`CoordinateState`]: `ψ(x)` sampled at the Nyquist spacing
//!   `Δx = πħ/b_eff` of its band limit.
//!
//! With the convention `ψ(x) = ∫ c(p) e^{ipx/ħ} dp`, coordinate and momentum
//! norms are related by `∫|ψ|²dx = 2πħ ∫|c|²dp`; [`GridState::norm`] reports
//! the coordinate-space value so both pictures agree.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::DeformationSpec;
use crate::error::{Error, Result};
use crate::spectral::{centered_offsets, pad_centered, Transform};

/// Edge amplitude, relative to the peak, above which a packet is reported as
/// not decaying inside `[-b_eff, b_eff]`.
pub const EDGE_WARNING_RATIO: f64 = 1e-8;

const GRID_MATCH_TOL: f64 = 1e-12;

/// Uniform periodic momentum grid `p_k = (k - M/2) Δp`, `Δp = 2 b_eff / M`.
///
/// The node `-b_eff` stands for both ends of the interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    len: usize,
    b_eff: f64,
}

impl MomentumGrid {
    pub fn new(len: usize, b_eff: f64) -> Result<Self> {
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "momentum grid size must be even and at least 2, got {len}"
            )));
        }
        if !(b_eff.is_finite() && b_eff > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "momentum cutoff must be positive and finite, got {b_eff}"
            )));
        }
        Ok(Self { len, b_eff })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn b_eff(&self) -> f64 {
        self.b_eff
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.b_eff / self.len as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        (k as f64 - (self.len / 2) as f64) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dp = self.spacing();
        centered_offsets(self.len).map(|o| o * dp).collect()
    }

    /// The coordinate grid sampling the band limit at the Nyquist rate.
    pub fn coordinate_grid(&self, hbar: f64) -> CoordinateGrid {
        CoordinateGrid {
            len: self.len,
            dx: PI * hbar / self.b_eff,
        }
    }
}

/// Uniform centered coordinate grid `x_j = (j - M/2) Δx`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateGrid {
    len: usize,
    dx: f64,
}

impl CoordinateGrid {
    pub fn new(len: usize, dx: f64) -> Result<Self> {
        if len < 2 || !len.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "coordinate grid size must be even and at least 2, got {len}"
            )));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("invalid spacing {dx}")));
        }
        Ok(Self { len, dx })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self) -> f64 {
        self.dx
    }

    pub fn period(&self) -> f64 {
        self.len as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        centered_offsets(self.len).map(|o| o * self.dx).collect()
    }

    /// Largest momentum representable at this spacing, `πħ/Δx`.
    pub fn band_limit(&self, hbar: f64) -> f64 {
        PI * hbar / self.dx
    }

    pub fn momentum_grid(&self, hbar: f64) -> MomentumGrid {
        MomentumGrid {
            len: self.len,
            b_eff: self.band_limit(hbar),
        }
    }
}

/// Gaussian momentum packet `c(p) ∝ exp(-(p - p̄)²/2σ²) e^{-ipx₀/ħ}`,
/// normalized so that `∫|ψ|²dx = 1` on the whole line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub center: f64,
    pub sigma: f64,
    #[serde(default)]
    pub x0: f64,
}

impl GaussianPacket {
    pub fn new(center: f64, sigma: f64) -> Self {
        Self {
            center,
            sigma,
            x0: 0.0,
        }
    }

    pub fn displaced(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    pub fn amplitude(&self, p: f64, hbar: f64) -> Complex64 {
        let norm = (2.0 * PI * hbar * self.sigma * PI.sqrt()).sqrt().recip();
        let z = (p - self.center) / self.sigma;
        Complex64::from_polar(norm * (-0.5 * z * z).exp(), -p * self.x0 / hbar)
    }
}

/// Sampled momentum amplitudes on a [`MomentumGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    grid: MomentumGrid,
    values: Vec<Complex64>,
    time: f64,
    spec: Arc<DeformationSpec>,
}

impl GridState {
    pub fn new(
        spec: Arc<DeformationSpec>,
        grid: MomentumGrid,
        values: Vec<Complex64>,
        time: f64,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if grid.b_eff() > spec.momentum_bound() {
            return Err(Error::Domain(format!(
                "cutoff {} exceeds the momentum bound {}",
                grid.b_eff(),
                spec.momentum_bound()
            )));
        }
        Ok(Self {
            grid,
            values,
            time,
            spec,
        })
    }

    pub fn from_fn(
        spec: Arc<DeformationSpec>,
        grid: MomentumGrid,
        time: f64,
        amplitude: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let values = grid.nodes().into_iter().map(amplitude).collect();
        Self::new(spec, grid, values, time)
    }

    /// Samples a Gaussian packet at `t = 0`, warning when it has not decayed
    /// at the edge of the grid.
    pub fn gaussian(
        spec: Arc<DeformationSpec>,
        grid: MomentumGrid,
        packet: GaussianPacket,
    ) -> Result<Self> {
        if !(packet.sigma.is_finite() && packet.sigma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "packet width must be positive, got {}",
                packet.sigma
            )));
        }
        let hbar = spec.hbar();
        let state = Self::from_fn(spec, grid, 0.0, |p| packet.amplitude(p, hbar))?;
        let ratio = state.edge_ratio();
        if ratio > EDGE_WARNING_RATIO {
            log::warn!(
                "packet amplitude at ±b_eff is {ratio:.2e} of its peak; the momentum cutoff truncates it"
            );
        }
        Ok(state)
    }

    pub fn grid(&self) -> MomentumGrid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn spec(&self) -> &Arc<DeformationSpec> {
        &self.spec
    }

    pub fn momenta(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// `|c(±b_eff)| / max|c|`.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let first = self.values[0].norm();
        let last = self.values[self.values.len() - 1].norm();
        first.max(last) / peak
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>, time: f64) -> Self {
        Self {
            grid: self.grid,
            values,
            time,
            spec: Arc::clone(&self.spec),
        }
    }

    /// Coordinate-space norm `(2πħ Δp Σ|c_k|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|c| c.norm_sqr()).sum();
        (2.0 * PI * self.spec.hbar() * self.grid.spacing() * sum).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let values = self.values.iter().map(|c| c / n).collect();
        Ok(self.with_values(values, self.time))
    }

    /// `Σ|c_k|Δp`, an upper bound on `max|ψ|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).sum::<f64>() * self.grid.spacing()
    }

    pub fn coordinate_grid(&self) -> CoordinateGrid {
        self.grid.coordinate_grid(self.spec.hbar())
    }

    /// `ψ` on the matched Nyquist grid.
    pub fn to_coordinate(&self) -> Result<CoordinateState> {
        self.to_coordinate_oversampled(1)
    }

    /// `ψ` on a grid `factor` times finer than the Nyquist grid, over the
    /// same period.
    pub fn to_coordinate_oversampled(&self, factor: usize) -> Result<CoordinateState> {
        oversampled_synthesis(
            &self.spec,
            &self.values,
            self.grid.spacing(),
            factor,
            self.time,
        )
    }

    /// Direct evaluation of the trapezoidal sum at arbitrary points.
    pub fn evaluate_at(&self, xs: &[f64]) -> Vec<Complex64> {
        let hbar = self.spec.hbar();
        let dp = self.grid.spacing();
        let nodes = self.grid.nodes();
        xs.iter()
            .map(|&x| {
                nodes
                    .iter()
                    .zip(&self.values)
                    .map(|(&p, &c)| c * Complex64::cis(p * x / hbar))
                    .sum::<Complex64>()
                    * dp
            })
            .collect()
    }
}

pub(crate) fn oversampled_synthesis(
    spec: &Arc<DeformationSpec>,
    spectrum: &[Complex64],
    dp: f64,
    factor: usize,
    time: f64,
) -> Result<CoordinateState> {
    if factor == 0 {
        return Err(Error::InvalidArgument("oversampling factor must be ≥ 1".into()));
    }
    let len = spectrum.len() * factor;
    let padded = pad_centered(spectrum, len);
    let values = Transform::new(len)?.synthesize(&padded, dp);
    let grid = CoordinateGrid::new(len, 2.0 * PI * spec.hbar() / (len as f64 * dp))?;
    Ok(CoordinateState {
        grid,
        values,
        time,
        spec: Arc::clone(spec),
    })
}

/// One plane-wave component `amplitude · e^{ipx/ħ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub p: f64,
    pub amplitude: Complex64,
}

/// Exact finite superposition of plane waves, amplitudes taken at `time`.
///
/// Components are kept sorted by momentum and coincident momenta are merged
/// by adding amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralState {
    components: Vec<Component>,
    time: f64,
    spec: Arc<DeformationSpec>,
}

impl SpectralState {
    pub fn new(spec: Arc<DeformationSpec>, time: f64) -> Self {
        Self {
            components: Vec::new(),
            time,
            spec,
        }
    }

    pub fn from_components(
        spec: Arc<DeformationSpec>,
        time: f64,
        components: impl IntoIterator<Item = Component>,
    ) -> Result<Self> {
        components
            .into_iter()
            .try_fold(Self::new(spec, time), |s, c| s.with_component(c.p, c.amplitude))
    }

    /// Adds a component whose amplitude is given at the state's time.
    pub fn with_component(mut self, p: f64, amplitude: Complex64) -> Result<Self> {
        self.spec.check_momentum(p)?;
        match self
            .components
            .binary_search_by(|c| c.p.partial_cmp(&p).expect("momenta are finite"))
        {
            Ok(i) => self.components[i].amplitude += amplitude,
            Err(i) => self.components.insert(i, Component { p, amplitude }),
        }
        Ok(self)
    }

    /// Superposition of two states defined at the same time.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        if self.time != other.time {
            return Err(Error::InvalidArgument(format!(
                "cannot merge states at t = {} and t = {}",
                self.time, other.time
            )));
        }
        other
            .components
            .iter()
            .try_fold(self.clone(), |s, c| s.with_component(c.p, c.amplitude))
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn spec(&self) -> &Arc<DeformationSpec> {
        &self.spec
    }

    pub(crate) fn with_parts(&self, components: Vec<Component>, time: f64) -> Self {
        Self {
            components,
            time,
            spec: Arc::clone(&self.spec),
        }
    }

    /// `ψ(x) = Σ a_i e^{i p_i x/ħ}`.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.derivative_at(x, 0)
    }

    /// `(p̂^k ψ)(x) = Σ a_i p_i^k e^{i p_i x/ħ}`.
    pub fn derivative_at(&self, x: f64, k: usize) -> Complex64 {
        let hbar = self.spec.hbar();
        self.components
            .iter()
            .map(|c| c.amplitude * c.p.powi(k as i32) * Complex64::cis(c.p * x / hbar))
            .sum()
    }

    pub fn max_abs_momentum(&self) -> f64 {
        self.components.iter().map(|c| c.p.abs()).fold(0.0, f64::max)
    }
}

/// `A e^{ip₀x/ħ}` with the free phase `e^{-iT(p₀)t/ħ}` applied.
pub fn plane_wave(
    spec: Arc<DeformationSpec>,
    amplitude: Complex64,
    p0: f64,
    t: f64,
) -> Result<SpectralState> {
    let phase = -spec.kinetic_energy(p0)? * t / spec.hbar();
    SpectralState::new(spec, t).with_component(p0, amplitude * Complex64::cis(phase))
}

/// Superposition of two free plane waves, both evolved from `t = 0`.
pub fn two_wave(
    spec: Arc<DeformationSpec>,
    a: Complex64,
    p1: f64,
    b: Complex64,
    p2: f64,
    t: f64,
) -> Result<SpectralState> {
    plane_wave(Arc::clone(&spec), a, p1, t)?.merge(&plane_wave(spec, b, p2, t)?)
}

/// Sampled `ψ(x)` on a Nyquist-rate [`CoordinateGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateState {
    grid: CoordinateGrid,
    values: Vec<Complex64>,
    time: f64,
    spec: Arc<DeformationSpec>,
}

impl CoordinateState {
    pub fn new(
        spec: Arc<DeformationSpec>,
        grid: CoordinateGrid,
        values: Vec<Complex64>,
        time: f64,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            values,
            time,
            spec,
        })
    }

    pub fn grid(&self) -> CoordinateGrid {
        self.grid
    }

    pub fn x(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn spec(&self) -> &Arc<DeformationSpec> {
        &self.spec
    }

    pub fn band_limit(&self) -> f64 {
        self.grid.band_limit(self.spec.hbar())
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        Self {
            grid: self.grid,
            values,
            time: self.time,
            spec: Arc::clone(&self.spec),
        }
    }

    pub(crate) fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    /// Momentum samples on the grid's own [`MomentumGrid`].
    pub fn momentum_values(&self) -> Result<Vec<Complex64>> {
        let dp = self.grid.momentum_grid(self.spec.hbar()).spacing();
        Ok(Transform::new(self.grid.len())?.analyze(&self.values, dp))
    }

    /// Inverse transform back to momentum amplitudes.
    pub fn to_momentum(&self) -> Result<GridState> {
        let grid = self.grid.momentum_grid(self.spec.hbar());
        let values = self.momentum_values()?;
        GridState::new(Arc::clone(&self.spec), grid, values, self.time)
    }

    /// Same state on a grid `factor` times finer.
    pub fn oversampled(&self, factor: usize) -> Result<Self> {
        let dp = self.grid.momentum_grid(self.spec.hbar()).spacing();
        oversampled_synthesis(&self.spec, &self.momentum_values()?, dp, factor, self.time)
    }

    /// `p̂^k ψ = (-iħ ∂ₓ)^k ψ`, exact for band-limited samples.
    pub fn spectral_derivative(&self, order: usize) -> Result<Self> {
        let mut stack = self.derivative_stack(order)?;
        Ok(self.with_values(stack.pop().expect("stack holds order + 1 entries")))
    }

    /// `[ψ, p̂ψ, ..., p̂^max ψ]` from a single forward transform.
    pub(crate) fn derivative_stack(&self, max_order: usize) -> Result<Vec<Vec<Complex64>>> {
        let mgrid = self.grid.momentum_grid(self.spec.hbar());
        let dp = mgrid.spacing();
        let transform = Transform::new(self.grid.len())?;
        let spectrum = transform.analyze(&self.values, dp);
        let nodes = mgrid.nodes();
        let mut out = Vec::with_capacity(max_order + 1);
        out.push(self.values.clone());
        let mut current = spectrum;
        for _ in 0..max_order {
            current
                .iter_mut()
                .zip(&nodes)
                .for_each(|(c, &p)| *c *= p);
            out.push(transform.synthesize(&current, dp));
        }
        Ok(out)
    }

    pub fn conj(&self) -> Self {
        self.with_values(self.values.iter().map(|v| v.conj()).collect())
    }

    /// `ρ(x) = |ψ(x)|²`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `(Δx Σ|ψ_j|²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (self.grid.spacing() * self.density().iter().sum::<f64>()).sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(self.with_values(self.values.iter().map(|v| v / n).collect()))
    }

    /// `⟨x⟩` over one period of the grid.
    pub fn mean_position(&self) -> f64 {
        let rho = self.density();
        let total: f64 = rho.iter().sum();
        self.x().iter().zip(&rho).map(|(x, r)| x * r).sum::<f64>() / total
    }
}

/// States that can be sampled on a coordinate grid.
pub trait Synthesize {
    fn synthesize_coordinate(&self, grid: &CoordinateGrid) -> Result<CoordinateState>;
}

impl Synthesize for GridState {
    /// Requires the matched Nyquist grid; anything coarser aliases.
    fn synthesize_coordinate(&self, grid: &CoordinateGrid) -> Result<CoordinateState> {
        let matched = self.coordinate_grid();
        let rel = (grid.spacing() - matched.spacing()) / matched.spacing();
        if rel > GRID_MATCH_TOL {
            return Err(Error::Aliasing(format!(
                "Δx = {} exceeds the Nyquist spacing {} of the band limit {}",
                grid.spacing(),
                matched.spacing(),
                self.grid.b_eff()
            )));
        }
        if rel.abs() > GRID_MATCH_TOL || grid.len() != matched.len() {
            return Err(Error::InvalidGrid(format!(
                "expected the matched grid of {} nodes with Δx = {}",
                matched.len(),
                matched.spacing()
            )));
        }
        self.to_coordinate()
    }
}

impl Synthesize for SpectralState {
    /// Exact evaluation; every momentum must fit inside the grid's band.
    fn synthesize_coordinate(&self, grid: &CoordinateGrid) -> Result<CoordinateState> {
        let band = grid.band_limit(self.spec.hbar());
        if let Some(c) = self.components.iter().find(|c| c.p >= band || c.p < -band) {
            return Err(Error::Aliasing(format!(
                "momentum {} outside the band [-{band}, {band}) of Δx = {}",
                c.p,
                grid.spacing()
            )));
        }
        let values = grid.nodes().iter().map(|&x| self.evaluate(x)).collect();
        CoordinateState::new(Arc::clone(&self.spec), *grid, values, self.time)
    }
}

pub fn synthesize_coordinate<S: Synthesize>(
    state: &S,
    grid: &CoordinateGrid,
) -> Result<CoordinateState> {
    state.synthesize_coordinate(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undeformed() -> Arc<DeformationSpec> {
        Arc::new(DeformationSpec::undeformed())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn plane_wave_phases() {
        let s = plane_wave(undeformed(), c(1.0, 0.0), 1.0, 0.0).unwrap();
        assert_eq!(s.components(), &[Component { p: 1.0, amplitude: c(1.0, 0.0) }]);
        let s = plane_wave(undeformed(), c(1.0, 0.0), 1.0, PI).unwrap();
        let a = s.components()[0].amplitude;
        assert!((a - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn coincident_components_merge() {
        let spec = undeformed();
        let a = plane_wave(Arc::clone(&spec), c(1.0, 0.5), 0.3, 0.0).unwrap();
        let b = plane_wave(Arc::clone(&spec), c(-0.2, 2.0), 0.3, 0.0).unwrap();
        let merged = a.merge(&b).unwrap();
        assert_eq!(merged.components().len(), 1);
        assert_eq!(merged.components()[0].amplitude, c(0.8, 2.5));
    }

    #[test]
    fn merge_rejects_mismatched_time_or_spec() {
        let a = plane_wave(undeformed(), c(1.0, 0.0), 0.3, 0.0).unwrap();
        let b = plane_wave(undeformed(), c(1.0, 0.0), 0.3, 1.0).unwrap();
        assert!(a.merge(&b).is_err());
        let k = Arc::new(DeformationSpec::kempf_tan(1.0).unwrap());
        let d = plane_wave(k, c(1.0, 0.0), 0.3, 0.0).unwrap();
        assert!(matches!(a.merge(&d), Err(Error::SpecMismatch)));
    }

    #[test]
    fn plane_wave_outside_domain() {
        let k = Arc::new(DeformationSpec::kempf_tan(1.0).unwrap());
        assert!(plane_wave(k, c(1.0, 0.0), 2.0, 0.0).is_err());
    }

    #[test]
    fn zero_momentum_is_constant() {
        let s = plane_wave(undeformed(), c(1.0, 0.0), 0.0, 0.0).unwrap();
        let grid = CoordinateGrid::new(16, 0.4).unwrap();
        let psi = s.synthesize_coordinate(&grid).unwrap();
        assert!(psi.values().iter().all(|v| *v == c(1.0, 0.0)));
    }

    #[test]
    fn standing_wave_is_cosine() {
        let p = 0.75;
        let s = two_wave(undeformed(), c(1.0, 0.0), p, c(1.0, 0.0), -p, 0.0).unwrap();
        let grid = CoordinateGrid::new(32, 0.3).unwrap();
        let psi = s.synthesize_coordinate(&grid).unwrap();
        for (x, v) in psi.x().iter().zip(psi.values()) {
            assert!((v - c(2.0 * (p * x).cos(), 0.0)).norm() < 1e-14);
        }
        let rho = psi.density();
        for (x, r) in psi.x().iter().zip(rho) {
            assert!((r - 4.0 * (p * x).cos().powi(2)).abs() < 1e-13);
        }
    }

    #[test]
    fn spectral_synthesis_detects_aliasing() {
        let s = plane_wave(undeformed(), c(1.0, 0.0), 5.0, 0.0).unwrap();
        let grid = CoordinateGrid::new(16, 1.0).unwrap(); // band limit π
        assert!(matches!(s.synthesize_coordinate(&grid), Err(Error::Aliasing(_))));
    }

    #[test]
    fn grid_synthesis_requires_matched_grid() {
        let grid = MomentumGrid::new(16, 4.0).unwrap();
        let g = GridState::gaussian(undeformed(), grid, GaussianPacket::new(0.0, 0.5)).unwrap();
        let coarse = CoordinateGrid::new(16, 2.0 * PI / 4.0).unwrap();
        assert!(matches!(g.synthesize_coordinate(&coarse), Err(Error::Aliasing(_))));
        let fine = CoordinateGrid::new(16, PI / 8.0).unwrap();
        assert!(matches!(g.synthesize_coordinate(&fine), Err(Error::InvalidGrid(_))));
        assert!(g.synthesize_coordinate(&g.coordinate_grid()).is_ok());
    }

    #[test]
    fn zero_state_norm() {
        let grid = MomentumGrid::new(8, 1.0).unwrap();
        let g = GridState::new(undeformed(), grid, vec![c(0.0, 0.0); 8], 0.0).unwrap();
        assert_eq!(g.norm(), 0.0);
        assert!(matches!(g.normalized(), Err(Error::ZeroNorm)));
        let psi = g.to_coordinate().unwrap();
        assert_eq!(psi.norm(), 0.0);
        assert!(matches!(psi.normalized(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn gaussian_is_unit_normalized() {
        let grid = MomentumGrid::new(256, 1.0).unwrap();
        let g = GridState::gaussian(undeformed(), grid, GaussianPacket::new(0.1, 0.1)).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-10, "{}", g.norm());
        let psi = g.to_coordinate().unwrap();
        assert!((psi.norm() - g.norm()).abs() < 1e-10);
    }

    #[test]
    fn cutoff_must_fit_the_domain() {
        let k = Arc::new(DeformationSpec::kempf_tan(1.0).unwrap());
        let grid = MomentumGrid::new(16, 2.0).unwrap();
        assert!(GridState::gaussian(k, grid, GaussianPacket::new(0.0, 0.1)).is_err());
    }

    #[test]
    fn odd_or_tiny_grids_are_rejected() {
        assert!(MomentumGrid::new(7, 1.0).is_err());
        assert!(MomentumGrid::new(8, 0.0).is_err());
        assert!(CoordinateGrid::new(0, 1.0).is_err());
    }

    #[test]
    fn derivative_zero_is_identity() {
        let grid = MomentumGrid::new(32, 3.0).unwrap();
        let g = GridState::gaussian(undeformed(), grid, GaussianPacket::new(0.5, 0.4)).unwrap();
        let psi = g.to_coordinate().unwrap();
        let d0 = psi.spectral_derivative(0).unwrap();
        assert_eq!(d0.values(), psi.values());
    }

    #[test]
    fn mean_position_of_displaced_packet() {
        let grid = MomentumGrid::new(256, 8.0).unwrap();
        let g = GridState::gaussian(
            undeformed(),
            grid,
            GaussianPacket::new(0.0, 1.0).displaced(3.0),
        )
        .unwrap();
        let psi = g.to_coordinate().unwrap();
        assert!((psi.mean_position() - 3.0).abs() < 1e-10);
    }
}
