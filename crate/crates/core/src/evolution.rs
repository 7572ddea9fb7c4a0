//! Time evolution and the continuity residual `∂ρ/∂t + ∂j/∂x`.
//!
//! Free evolution is a momentum-diagonal phase and is applied exactly. With
//! a potential, [`evolve_split_step`] uses Strang splitting with the full
//! deformed `T(p)` in the kinetic phase.
//!
//! The residual can be assembled from independent routes for each side:
//! `∂ρ/∂t` analytically from the exact phases, from the truncated series, or
//! by a central difference of evolved states; `j` from the closed form or the
//! series, differentiated spectrally.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{DeformationSpec, KineticCoefficients};
use crate::error::{Error, Result};
use crate::flux::{
    checked_real, flux_closed_spectral_gradient, flux_series, series_flux_gradient_from_stacks,
    spectral_stacks, ClosedGridFlux,
};
use crate::spectral::{periodic_derivative, Transform};
use crate::states::{Component, CoordinateState, GridState, SpectralState};

/// Relative size of the default finite-difference time step, `dt = 1e-5 ħ/max|T|`.
pub const DEFAULT_FD_SCALE: f64 = 1e-5;

/// States that evolve freely by `c(p) → c(p) e^{-iT(p)dt/ħ}`.
pub trait FreeEvolution: Sized {
    fn evolve_free(&self, dt: f64) -> Result<Self>;
}

fn unit_phase(theta: f64) -> Complex64 {
    Complex64::cis(-theta)
}

impl FreeEvolution for GridState {
    fn evolve_free(&self, dt: f64) -> Result<Self> {
        let spec = self.spec();
        let hbar = spec.hbar();
        let values = self
            .momenta()
            .iter()
            .zip(self.values())
            .map(|(&p, &c)| Ok(c * unit_phase(spec.kinetic_energy(p)? * dt / hbar)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.with_values(values, self.time() + dt))
    }
}

impl FreeEvolution for SpectralState {
    fn evolve_free(&self, dt: f64) -> Result<Self> {
        if dt == 0.0 {
            return Ok(self.clone());
        }
        let spec = self.spec();
        let hbar = spec.hbar();
        let components = self
            .components()
            .iter()
            .map(|c| {
                Ok(Component {
                    p: c.p,
                    amplitude: c.amplitude * unit_phase(spec.kinetic_energy(c.p)? * dt / hbar),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.with_parts(components, self.time() + dt))
    }
}

pub fn evolve_free<S: FreeEvolution>(state: &S, dt: f64) -> Result<S> {
    state.evolve_free(dt)
}

/// `steps` Strang steps `e^{-iU dt/2ħ} e^{-iT dt/ħ} e^{-iU dt/2ħ}`.
pub fn evolve_split_step(
    psi: &CoordinateState,
    potential: &[f64],
    dt: f64,
    steps: usize,
) -> Result<CoordinateState> {
    if potential.len() != psi.values().len() {
        return Err(Error::InvalidArgument(format!(
            "potential has {} samples, state has {}",
            potential.len(),
            psi.values().len()
        )));
    }
    let spec = psi.spec();
    let hbar = spec.hbar();
    let mgrid = psi.grid().momentum_grid(hbar);
    let dp = mgrid.spacing();
    let kinetic = mgrid
        .nodes()
        .iter()
        .map(|&p| Ok(Complex64::cis(-spec.kinetic_energy(p)? * dt / hbar)))
        .collect::<Result<Vec<_>>>()?;
    let half_potential: Vec<Complex64> = potential
        .iter()
        .map(|&u| Complex64::cis(-u * dt / (2.0 * hbar)))
        .collect();
    let transform = Transform::new(psi.values().len())?;
    let mut values = psi.values().to_vec();
    for _ in 0..steps {
        values.iter_mut().zip(&half_potential).for_each(|(v, h)| *v *= h);
        let mut spectrum = transform.analyze(&values, dp);
        spectrum.iter_mut().zip(&kinetic).for_each(|(c, k)| *c *= k);
        values = transform.synthesize(&spectrum, dp);
        values.iter_mut().zip(&half_potential).for_each(|(v, h)| *v *= h);
    }
    Ok(psi
        .with_values(values)
        .with_time(psi.time() + dt * steps as f64))
}

fn drho_from_stacks(
    d: &[Vec<Complex64>],
    e: &[Vec<Complex64>],
    coeffs: &KineticCoefficients,
    order: usize,
    spec: &DeformationSpec,
) -> Vec<Complex64> {
    let len = d[0].len();
    // 1 / (2m iħ)
    let prefactor = Complex64::new(0.0, -1.0 / (2.0 * spec.mass() * spec.hbar()));
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for n in 1..=order {
        let weight = coeffs.a(n) * spec.beta().powi(n as i32 - 1);
        if weight == 0.0 {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += weight * (e[0][i] * d[2 * n][i] - d[0][i] * e[2 * n][i]);
        }
    }
    out.iter_mut().for_each(|o| *o *= prefactor);
    out
}

fn check_series_order(coeffs: &KineticCoefficients, order: usize) -> Result<()> {
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

fn rate_scale(psi: &CoordinateState) -> f64 {
    let spec = psi.spec();
    let band = psi.band_limit();
    let peak = psi.density().iter().fold(0.0_f64, |m, &r| m.max(r));
    peak * band * band / (spec.mass() * spec.hbar())
}

/// Truncated series for `∂|ψ|²/∂t = (1/iħ)(ψ* Tψ - ψ Tψ*)`; any potential
/// cancels, so the result holds with or without one.
pub fn drho_dt(psi: &CoordinateState, coeffs: &KineticCoefficients, order: usize) -> Result<Vec<f64>> {
    check_series_order(coeffs, order)?;
    let d = psi.derivative_stack(2 * order)?;
    let e = psi.conj().derivative_stack(2 * order)?;
    let complex = drho_from_stacks(&d, &e, coeffs, order, psi.spec());
    Ok(checked_real(&complex, rate_scale(psi), "series ∂ρ/∂t")?.0)
}

/// How `∂ρ/∂t` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoMethod {
    /// Differentiate the exact time phases (plus `Uψ/iħ` for coordinate states).
    Analytic,
    /// Truncated series at the given order.
    Series(usize),
    /// Central difference of states evolved by `±dt`; default step when `None`.
    FiniteDifference(Option<f64>),
}

/// How `j` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurrentMethod {
    Series(usize),
    /// Closed double integral (grid states) or exact pair sum (spectral states).
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualOptions {
    pub rho: RhoMethod,
    pub current: CurrentMethod,
    /// Permit series orders to differ between the two sides.
    pub allow_order_mismatch: bool,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self {
            rho: RhoMethod::Analytic,
            current: CurrentMethod::Closed,
            allow_order_mismatch: false,
        }
    }
}

impl ResidualOptions {
    pub fn new(rho: RhoMethod, current: CurrentMethod) -> Self {
        Self {
            rho,
            current,
            allow_order_mismatch: false,
        }
    }

    fn check(&self) -> Result<()> {
        if let (RhoMethod::Series(a), CurrentMethod::Series(b)) = (self.rho, self.current) {
            if a != b && !self.allow_order_mismatch {
                return Err(Error::MethodMismatch(format!(
                    "∂ρ/∂t uses series order {a} but j uses order {b}"
                )));
            }
        }
        Ok(())
    }

    fn max_series_order(&self) -> usize {
        let rho = match self.rho {
            RhoMethod::Series(n) => n,
            _ => 0,
        };
        let current = match self.current {
            CurrentMethod::Series(n) => n,
            CurrentMethod::Closed => 0,
        };
        rho.max(current)
    }
}

/// The state whose continuity residual is evaluated.
#[derive(Clone, Copy, Debug)]
pub enum ResidualInput<'a> {
    /// Free grid state; evaluated on the grid with `Δx = πħ/(2 b_eff)`.
    Grid(&'a GridState),
    /// Free plane-wave superposition at the given points.
    Spectral(&'a SpectralState, &'a [f64]),
    /// Sampled state, optionally under a potential sampled on its grid;
    /// evaluated at the state's own nodes.
    Coordinate(&'a CoordinateState, Option<&'a [f64]>),
}

/// `r(x) = ∂ρ/∂t + ∂j/∂x` together with both terms and summary norms.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub drho_dt: Vec<f64>,
    pub dj_dx: Vec<f64>,
    pub max_abs: f64,
    pub l2: f64,
    pub rho_method: String,
    pub j_method: String,
    pub dt_fd: Option<f64>,
}

impl ResidualReport {
    fn assemble(
        x: Vec<f64>,
        drho_dt: Vec<f64>,
        dj_dx: Vec<f64>,
        rho_method: String,
        j_method: String,
        dt_fd: Option<f64>,
    ) -> Self {
        let residual: Vec<f64> = drho_dt.iter().zip(&dj_dx).map(|(a, b)| a + b).collect();
        let max_abs = residual.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        let l2 = trapezoid_l2(&x, &residual);
        Self {
            x,
            residual,
            drho_dt,
            dj_dx,
            max_abs,
            l2,
            rho_method,
            j_method,
            dt_fd,
        }
    }

    /// `max|∂j/∂x|`, the natural scale of the residual.
    pub fn scale(&self) -> f64 {
        self.dj_dx.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max|r| / max|∂j/∂x|`.
    pub fn relative_max(&self) -> f64 {
        self.max_abs / self.scale()
    }
}

fn trapezoid_l2(x: &[f64], r: &[f64]) -> f64 {
    if x.len() < 2 {
        return r.first().map_or(0.0, |v| v.abs());
    }
    let mut sum = 0.0;
    for i in 0..x.len() {
        let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
        let right = if i + 1 < x.len() { x[i + 1] - x[i] } else { 0.0 };
        // uniform periodic grids: every node carries a full Δx
        let w = if i == 0 || i + 1 == x.len() {
            left.max(right)
        } else {
            0.5 * (left + right)
        };
        sum += w * r[i] * r[i];
    }
    sum.sqrt()
}

fn rho_label(m: RhoMethod) -> String {
    match m {
        RhoMethod::Analytic => "analytic".into(),
        RhoMethod::Series(n) => format!("series-N{n}"),
        RhoMethod::FiniteDifference(_) => "finite-difference".into(),
    }
}

fn default_dt(spec: &DeformationSpec, momenta: impl Iterator<Item = f64>) -> Result<f64> {
    let mut t_max = 0.0_f64;
    for p in momenta {
        t_max = t_max.max(spec.kinetic_energy(p)?.abs());
    }
    Ok(DEFAULT_FD_SCALE * spec.hbar() / if t_max > 0.0 { t_max } else { 1.0 })
}

fn density_rate(psi: &[Complex64], dpsi_dt: &[Complex64]) -> Vec<f64> {
    psi.iter()
        .zip(dpsi_dt)
        .map(|(p, d)| 2.0 * (p.conj() * d).re)
        .collect()
}

fn coefficients_for(spec: &DeformationSpec, opts: &ResidualOptions) -> Result<Option<KineticCoefficients>> {
    match opts.max_series_order() {
        0 => Ok(None),
        n => spec.taylor_coeffs(n).map(Some),
    }
}

/// Evaluates both sides of the continuity equation.
pub fn continuity_residual(input: ResidualInput<'_>, opts: ResidualOptions) -> Result<ResidualReport> {
    opts.check()?;
    match input {
        ResidualInput::Grid(state) => grid_residual(state, &opts),
        ResidualInput::Spectral(state, xs) => spectral_residual(state, xs, &opts),
        ResidualInput::Coordinate(psi, potential) => coordinate_residual(psi, potential, &opts),
    }
}

fn grid_residual(state: &GridState, opts: &ResidualOptions) -> Result<ResidualReport> {
    let spec = state.spec();
    let hbar = spec.hbar();
    let coeffs = coefficients_for(spec, opts)?;
    let fine = state.to_coordinate_oversampled(2)?;
    let x = fine.x();
    let dx = fine.grid().spacing();

    let (j, j_method) = match opts.current {
        CurrentMethod::Closed => {
            let eval = ClosedGridFlux::new(Arc::clone(spec), state.grid())?;
            (eval.evaluate_fine(state)?.values, "closed-grid".to_string())
        }
        CurrentMethod::Series(n) => {
            let c = coeffs.as_ref().expect("series order > 0");
            (flux_series(&fine, c, n)?.values, format!("series-N{n}"))
        }
    };
    let j_complex: Vec<Complex64> = j.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let jmax = j.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let dj = checked_real(
        &periodic_derivative(&j_complex, dx)?,
        jmax * state.grid().b_eff() / hbar,
        "∂j/∂x",
    )?
    .0;

    let mut dt_fd = None;
    let drho = match opts.rho {
        RhoMethod::Analytic => {
            let rates = state
                .momenta()
                .iter()
                .zip(state.values())
                .map(|(&p, &c)| Ok(c * Complex64::new(0.0, -spec.kinetic_energy(p)? / hbar)))
                .collect::<Result<Vec<_>>>()?;
            let dpsi = state.with_values(rates, state.time()).to_coordinate_oversampled(2)?;
            density_rate(fine.values(), dpsi.values())
        }
        RhoMethod::Series(n) => drho_dt(&fine, coeffs.as_ref().expect("series order > 0"), n)?,
        RhoMethod::FiniteDifference(step) => {
            let dt = match step {
                Some(dt) => dt,
                None => default_dt(spec, state.momenta().into_iter())?,
            };
            dt_fd = Some(dt);
            let ahead = state.evolve_free(dt)?.to_coordinate_oversampled(2)?.density();
            let behind = state.evolve_free(-dt)?.to_coordinate_oversampled(2)?.density();
            ahead
                .iter()
                .zip(&behind)
                .map(|(a, b)| (a - b) / (2.0 * dt))
                .collect()
        }
    };
    Ok(ResidualReport::assemble(x, drho, dj, rho_label(opts.rho), j_method, dt_fd))
}

fn spectral_residual(state: &SpectralState, xs: &[f64], opts: &ResidualOptions) -> Result<ResidualReport> {
    let spec = state.spec();
    let hbar = spec.hbar();
    let coeffs = coefficients_for(spec, opts)?;
    let w: f64 = state.components().iter().map(|c| c.amplitude.norm()).sum();
    let p_max = state.max_abs_momentum();

    let (dj, j_method) = match opts.current {
        CurrentMethod::Closed => (
            flux_closed_spectral_gradient(state, xs, state.time())?,
            "closed-spectral".to_string(),
        ),
        CurrentMethod::Series(n) => {
            let c = coeffs.as_ref().expect("series order > 0");
            let (d, e) = spectral_stacks(state, xs, 2 * n);
            let grad = series_flux_gradient_from_stacks(&d, &e, c, n, spec);
            let scale = w * w * p_max * p_max / (spec.mass() * hbar);
            (checked_real(&grad, scale, "∂j/∂x")?.0, format!("series-N{n}"))
        }
    };

    let mut dt_fd = None;
    let drho = match opts.rho {
        RhoMethod::Analytic => {
            let psi: Vec<Complex64> = xs.iter().map(|&x| state.evaluate(x)).collect();
            let rates = state
                .components()
                .iter()
                .map(|c| {
                    Ok(Component {
                        p: c.p,
                        amplitude: c.amplitude
                            * Complex64::new(0.0, -spec.kinetic_energy(c.p)? / hbar),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let rate_state = state.with_parts(rates, state.time());
            let dpsi: Vec<Complex64> = xs.iter().map(|&x| rate_state.evaluate(x)).collect();
            density_rate(&psi, &dpsi)
        }
        RhoMethod::Series(n) => {
            let c = coeffs.as_ref().expect("series order > 0");
            let (d, e) = spectral_stacks(state, xs, 2 * n);
            let scale = w * w * p_max * p_max / (spec.mass() * hbar);
            checked_real(&drho_from_stacks(&d, &e, c, n, spec), scale, "series ∂ρ/∂t")?.0
        }
        RhoMethod::FiniteDifference(step) => {
            let dt = match step {
                Some(dt) => dt,
                None => default_dt(spec, state.components().iter().map(|c| c.p))?,
            };
            dt_fd = Some(dt);
            let ahead = state.evolve_free(dt)?;
            let behind = state.evolve_free(-dt)?;
            xs.iter()
                .map(|&x| (ahead.evaluate(x).norm_sqr() - behind.evaluate(x).norm_sqr()) / (2.0 * dt))
                .collect()
        }
    };
    Ok(ResidualReport::assemble(
        xs.to_vec(),
        drho,
        dj,
        rho_label(opts.rho),
        j_method,
        dt_fd,
    ))
}

fn coordinate_residual(
    psi: &CoordinateState,
    potential: Option<&[f64]>,
    opts: &ResidualOptions,
) -> Result<ResidualReport> {
    let spec = psi.spec();
    let hbar = spec.hbar();
    let coeffs = coefficients_for(spec, opts)?;
    let n = psi.values().len();
    if let Some(u) = potential {
        if u.len() != n {
            return Err(Error::InvalidArgument(format!(
                "potential has {} samples, state has {n}",
                u.len()
            )));
        }
    }

    // j has twice the bandwidth of ψ: build it on the doubled grid and keep
    // the even samples, which are the state's own nodes.
    let fine = psi.oversampled(2)?;
    let (j, j_method) = match opts.current {
        CurrentMethod::Closed => {
            let state = psi.to_momentum()?;
            let eval = ClosedGridFlux::new(Arc::clone(spec), state.grid())?;
            (eval.evaluate_fine(&state)?.values, "closed-grid".to_string())
        }
        CurrentMethod::Series(order) => {
            let c = coeffs.as_ref().expect("series order > 0");
            (flux_series(&fine, c, order)?.values, format!("series-N{order}"))
        }
    };
    let j_complex: Vec<Complex64> = j.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let jmax = j.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let dj_fine = checked_real(
        &periodic_derivative(&j_complex, fine.grid().spacing())?,
        jmax * psi.band_limit() / hbar,
        "∂j/∂x",
    )?
    .0;
    let dj: Vec<f64> = dj_fine.iter().step_by(2).copied().collect();

    let mut dt_fd = None;
    let drho = match opts.rho {
        RhoMethod::Analytic => {
            let mgrid = psi.grid().momentum_grid(hbar);
            let dp = mgrid.spacing();
            let transform = Transform::new(n)?;
            let mut spectrum = transform.analyze(psi.values(), dp);
            for (c, &p) in spectrum.iter_mut().zip(&mgrid.nodes()) {
                *c *= spec.kinetic_energy(p)?;
            }
            let t_psi = transform.synthesize(&spectrum, dp);
            let inv_i_hbar = Complex64::new(0.0, -1.0 / hbar);
            let dpsi: Vec<Complex64> = t_psi
                .iter()
                .zip(psi.values())
                .enumerate()
                .map(|(i, (tp, v))| {
                    let u = potential.map_or(0.0, |u| u[i]);
                    (tp + v * u) * inv_i_hbar
                })
                .collect();
            density_rate(psi.values(), &dpsi)
        }
        RhoMethod::Series(order) => drho_dt(psi, coeffs.as_ref().expect("series order > 0"), order)?,
        RhoMethod::FiniteDifference(step) => {
            let mgrid = psi.grid().momentum_grid(hbar);
            let dt = match step {
                Some(dt) => dt,
                None => default_dt(spec, mgrid.nodes().into_iter())?,
            };
            dt_fd = Some(dt);
            let zero;
            let u = match potential {
                Some(u) => u,
                None => {
                    zero = vec![0.0; n];
                    &zero
                }
            };
            let ahead = evolve_split_step(psi, u, dt, 1)?.density();
            let behind = evolve_split_step(psi, u, -dt, 1)?.density();
            ahead
                .iter()
                .zip(&behind)
                .map(|(a, b)| (a - b) / (2.0 * dt))
                .collect()
        }
    };
    Ok(ResidualReport::assemble(
        psi.x(),
        drho,
        dj,
        rho_label(opts.rho),
        j_method,
        dt_fd,
    ))
}
