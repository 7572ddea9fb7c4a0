//! Deformed Heisenberg algebras `[X, P] = iħ F(√β P)`.
//!
//! An algebra is encoded by its odd deformation function `f`, with
//! `P = f(√β p) / √β` acting on canonical operators `[x, p] = iħ`. Everything
//! downstream (kinetic energy, its derivative, the kinetic-energy series and
//! the divided-difference kernel used by the closed flux formula) is derived
//! here.
//!
//! Every expression that carries `1/β` or `1/√β` has a separate β = 0 branch,
//! so the undeformed algebra is evaluated exactly rather than as a limit.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{cauchy_product, tan_odd_coeffs, PowerSeries};

/// Relative scale of the default diagonal threshold of the kernel.
pub const DEFAULT_DIAGONAL_SCALE: f64 = 1e-8;

const MONOTONICITY_SAMPLES: usize = 257;
const INVERSE_MAX_ITERATIONS: usize = 200;

/// Which closed form backs the deformation function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgebraKind {
    /// `f(u) = u`, the canonical algebra.
    Undeformed,
    /// `f(u) = tan u`, realizing `[X, P] = iħ(1 + βP²)`.
    KempfTan,
    /// `f` given by its odd Taylor coefficients, optionally with a closed form.
    UserSeries,
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            AlgebraKind::Undeformed => "undeformed",
            AlgebraKind::KempfTan => "kempf-tan",
            AlgebraKind::UserSeries => "user-series",
        };
        f.write_str(name)
    }
}

/// Optional closed-form evaluator for a user-supplied deformation function.
#[derive(Clone, Copy)]
pub struct ClosedForm {
    /// `f(u)`
    pub f: fn(f64) -> f64,
    /// `f'(u)`
    pub df: fn(f64) -> f64,
}

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ClosedForm { .. }")
    }
}

impl PartialEq for ClosedForm {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::fn_addr_eq(self.f, other.f) && std::ptr::fn_addr_eq(self.df, other.df)
    }
}

/// A deformed algebra together with the physical constants it is used with.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationSpec {
    kind: AlgebraKind,
    beta: f64,
    hbar: f64,
    mass: f64,
    /// Odd-order coefficients `[c1, c3, ...]`; only stored for user series.
    f_series: Vec<f64>,
    momentum_bound: f64,
    closed_form: Option<ClosedForm>,
    diagonal_threshold: Option<f64>,
}

impl DeformationSpec {
    /// The canonical algebra, `T = p²/2m` on the whole real line.
    pub fn undeformed() -> Self {
        Self {
            kind: AlgebraKind::Undeformed,
            beta: 0.0,
            hbar: 1.0,
            mass: 1.0,
            f_series: Vec::new(),
            momentum_bound: f64::INFINITY,
            closed_form: None,
            diagonal_threshold: None,
        }
    }

    /// `P = tan(√β p)/√β`, with momentum domain `|p| < π/(2√β)`.
    pub fn kempf_tan(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let momentum_bound = if beta == 0.0 {
            f64::INFINITY
        } else {
            FRAC_PI_2 / beta.sqrt()
        };
        Ok(Self {
            kind: AlgebraKind::KempfTan,
            beta,
            momentum_bound,
            ..Self::undeformed()
        })
    }

    /// Deformation given by odd Taylor coefficients `[c1, c3, c5, ...]` of `f`.
    ///
    /// `c1` must be exactly 1 and `f` must be strictly increasing on
    /// `[-√β b, √β b]`; the latter is checked on a uniform sample when the
    /// bound is finite.
    pub fn user_series(beta: f64, odd_coeffs: Vec<f64>, momentum_bound: f64) -> Result<Self> {
        check_beta(beta)?;
        match odd_coeffs.first() {
            Some(1.0) => {}
            Some(&c1) => {
                return Err(Error::InvalidSpec(format!(
                    "leading coefficient of f must be 1, got {c1}"
                )))
            }
            None => return Err(Error::InvalidSpec("empty coefficient list".into())),
        }
        if odd_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite coefficient".into()));
        }
        if momentum_bound.is_nan() || momentum_bound <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "momentum bound must be positive, got {momentum_bound}"
            )));
        }
        let spec = Self {
            kind: AlgebraKind::UserSeries,
            beta,
            f_series: odd_coeffs,
            momentum_bound,
            ..Self::undeformed()
        };
        spec.check_monotone()?;
        Ok(spec)
    }

    /// Sets ħ and m.
    pub fn with_units(mut self, hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidSpec(format!("hbar must be positive, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidSpec(format!("mass must be positive, got {mass}")));
        }
        self.hbar = hbar;
        self.mass = mass;
        Ok(self)
    }

    /// Attaches a closed-form evaluator to a user series.
    pub fn with_closed_form(mut self, closed: ClosedForm) -> Result<Self> {
        if self.kind != AlgebraKind::UserSeries {
            return Err(Error::InvalidSpec(
                "closed forms can only be attached to user series".into(),
            ));
        }
        self.closed_form = Some(closed);
        self.check_monotone()?;
        Ok(self)
    }

    /// Overrides the distance `|p - q|` below which the kernel returns `T'`.
    pub fn with_diagonal_threshold(mut self, eps: f64) -> Result<Self> {
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidSpec(format!("invalid diagonal threshold {eps}")));
        }
        self.diagonal_threshold = Some(eps);
        Ok(self)
    }

    pub fn kind(&self) -> AlgebraKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `b`, the edge of the momentum domain `[-b, b]`; may be infinite.
    pub fn momentum_bound(&self) -> f64 {
        self.momentum_bound
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.closed_form
    }

    /// Stored odd coefficients of a user series (empty for built-ins).
    pub fn user_coeffs(&self) -> &[f64] {
        &self.f_series
    }

    /// Minimal position uncertainty `ħ√β`.
    pub fn minimal_length(&self) -> f64 {
        self.hbar * self.beta.sqrt()
    }

    /// True when every formula reduces to the canonical algebra.
    pub fn is_undeformed(&self) -> bool {
        self.kind == AlgebraKind::Undeformed || self.beta == 0.0
    }

    pub fn diagonal_threshold(&self) -> f64 {
        self.diagonal_threshold.unwrap_or_else(|| {
            let b = if self.momentum_bound.is_finite() {
                self.momentum_bound
            } else {
                1.0
            };
            DEFAULT_DIAGONAL_SCALE * b.max(1.0)
        })
    }

    /// The first `count` odd coefficients of `f`.
    pub fn odd_coeffs(&self, count: usize) -> Result<Vec<f64>> {
        match self.kind {
            AlgebraKind::Undeformed => {
                let mut c = vec![0.0; count];
                if let Some(first) = c.first_mut() {
                    *first = 1.0;
                }
                Ok(c)
            }
            AlgebraKind::KempfTan => Ok(tan_odd_coeffs(count)),
            AlgebraKind::UserSeries => {
                if self.f_series.len() < count {
                    return Err(Error::InsufficientSeriesOrder {
                        required: count,
                        available: self.f_series.len(),
                    });
                }
                Ok(self.f_series[..count].to_vec())
            }
        }
    }

    fn user_series_f(&self, u: f64) -> f64 {
        let u2 = u * u;
        u * self.f_series.iter().rev().fold(0.0, |acc, &c| acc * u2 + c)
    }

    fn user_series_df(&self, u: f64) -> f64 {
        let u2 = u * u;
        self.f_series
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * u2 + (2 * k + 1) as f64 * c)
    }

    fn check_f_argument(&self, u: f64) -> Result<()> {
        if !u.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {u}")));
        }
        match self.kind {
            AlgebraKind::KempfTan if u.abs() >= FRAC_PI_2 => Err(Error::Domain(format!(
                "|u| = {} at or beyond the pole of tan at π/2",
                u.abs()
            ))),
            AlgebraKind::UserSeries if self.closed_form.is_none() => {
                let limit = self.beta.sqrt() * self.momentum_bound;
                if self.beta > 0.0 && u.abs() > limit * (1.0 + 4.0 * f64::EPSILON) {
                    Err(Error::Domain(format!(
                        "|u| = {} outside the series domain {limit}",
                        u.abs()
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `f(u)`.
    pub fn eval_f(&self, u: f64) -> Result<f64> {
        self.check_f_argument(u)?;
        Ok(match self.kind {
            AlgebraKind::Undeformed => u,
            AlgebraKind::KempfTan => u.tan(),
            AlgebraKind::UserSeries => match self.closed_form {
                Some(cf) => (cf.f)(u),
                None => self.user_series_f(u),
            },
        })
    }

    /// `f'(u)`.
    pub fn eval_f_prime(&self, u: f64) -> Result<f64> {
        self.check_f_argument(u)?;
        Ok(match self.kind {
            AlgebraKind::Undeformed => 1.0,
            AlgebraKind::KempfTan => {
                let c = u.cos();
                1.0 / (c * c)
            }
            AlgebraKind::UserSeries => match self.closed_form {
                Some(cf) => (cf.df)(u),
                None => self.user_series_df(u),
            },
        })
    }

    /// Solves `f(u) = v` for `u` inside the momentum domain.
    pub fn inverse_f(&self, v: f64) -> Result<f64> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite argument {v}")));
        }
        match self.kind {
            AlgebraKind::Undeformed => Ok(v),
            AlgebraKind::KempfTan => Ok(v.atan()),
            AlgebraKind::UserSeries => self.inverse_monotone(v),
        }
    }

    /// Safeguarded Newton iteration on `[0, u_max]`, using that `f` is odd.
    fn inverse_monotone(&self, v: f64) -> Result<f64> {
        let target = v.abs();
        if target == 0.0 {
            return Ok(0.0);
        }
        let f = |u: f64| self.eval_f(u);
        let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
        let u_max = self.beta.sqrt() * self.momentum_bound;
        if self.beta > 0.0 && u_max.is_finite() {
            hi = u_max;
            if f(hi)? < target {
                return Err(Error::Domain(format!(
                    "{v} lies outside the range of f on the momentum domain"
                )));
            }
        } else {
            let mut step = 1.0;
            for _ in 0..64 {
                if f(step)? >= target {
                    hi = step;
                    break;
                }
                lo = step;
                step *= 2.0;
            }
            if hi == 0.0 {
                return Err(Error::InversionFailure { target: v });
            }
        }
        let mut u = 0.5 * (lo + hi);
        for _ in 0..INVERSE_MAX_ITERATIONS {
            let r = f(u)? - target;
            if r == 0.0 {
                return Ok(u.copysign(v));
            }
            if r > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let d = self.eval_f_prime(u)?;
            let newton = u - r / d;
            let next = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - u).abs() <= 4.0 * f64::EPSILON * u.abs().max(f64::MIN_POSITIVE) {
                return Ok(next.copysign(v));
            }
            u = next;
        }
        Err(Error::InversionFailure { target: v })
    }

    /// The commutator factor `F(√β P) = f'(f⁻¹(√β P))`.
    pub fn commutator_factor(&self, big_p: f64) -> Result<f64> {
        if !big_p.is_finite() {
            return Err(Error::Domain(format!("non-finite momentum {big_p}")));
        }
        if self.is_undeformed() {
            return Ok(1.0);
        }
        let u = self.inverse_f(self.beta.sqrt() * big_p)?;
        self.eval_f_prime(u)
    }

    /// Rejects momenta outside the domain, including the pole of `tan` at `b`.
    pub fn check_momentum(&self, p: f64) -> Result<()> {
        if !p.is_finite() {
            return Err(Error::Domain(format!("non-finite momentum {p}")));
        }
        let b = self.momentum_bound;
        let outside = if self.kind == AlgebraKind::KempfTan && !self.is_undeformed() {
            p.abs() >= b
        } else {
            p.abs() > b
        };
        if outside {
            return Err(Error::Domain(format!("|p| = {} outside the domain |p| ≤ {b}", p.abs())));
        }
        Ok(())
    }

    /// `T(p, β) = f²(√β p) / (2mβ)`.
    pub fn kinetic_energy(&self, p: f64) -> Result<f64> {
        self.check_momentum(p)?;
        if self.is_undeformed() {
            return Ok(p * p / (2.0 * self.mass));
        }
        let f = self.eval_f(self.beta.sqrt() * p)?;
        Ok(f * f / (2.0 * self.mass * self.beta))
    }

    /// `∂T/∂p = f(√β p) f'(√β p) / (m√β)`, the group velocity.
    pub fn kinetic_derivative(&self, p: f64) -> Result<f64> {
        self.check_momentum(p)?;
        if self.is_undeformed() {
            return Ok(p / self.mass);
        }
        let sb = self.beta.sqrt();
        let u = sb * p;
        Ok(self.eval_f(u)? * self.eval_f_prime(u)? / (self.mass * sb))
    }

    /// Coefficients `a_1..a_N` of `T = (1/2m) Σ a_n β^{n-1} p^{2n}`.
    ///
    /// `a_n` is the coefficient of `x^{2n}` in `f(x)²`, obtained by squaring
    /// the odd coefficient list.
    pub fn taylor_coeffs(&self, order: usize) -> Result<KineticCoefficients> {
        if order == 0 {
            return Err(Error::InvalidArgument("series order must be at least 1".into()));
        }
        let c = self.odd_coeffs(order)?;
        // x^{2i+1} x^{2j+1} = x^{2(i+j+1)}: the Cauchy square of the odd list
        // is exactly a_1, a_2, ...
        let coeffs = cauchy_product(&c, &c, order);
        Ok(KineticCoefficients { coeffs })
    }

    /// `(T(p) - T(q)) / (p - q)`, equal to `T'` on the diagonal.
    pub fn divided_difference_kernel(&self, p: f64, q: f64) -> Result<f64> {
        let a = self.kernel_node(p)?;
        let b = self.kernel_node(q)?;
        Ok(self.kernel_pair(&a, &b))
    }

    pub(crate) fn kernel_node(&self, p: f64) -> Result<KernelNode> {
        self.check_momentum(p)?;
        let dt = self.kinetic_derivative(p)?;
        let mut node = KernelNode {
            p,
            u: 0.0,
            f: 0.0,
            aux: 0.0,
            dt,
        };
        if self.is_undeformed() {
            return Ok(node);
        }
        node.u = self.beta.sqrt() * p;
        match (self.kind, self.closed_form) {
            (AlgebraKind::KempfTan, _) => {
                node.f = node.u.tan();
                node.aux = node.u.cos();
            }
            (AlgebraKind::UserSeries, None) => node.f = self.user_series_f(node.u),
            (AlgebraKind::UserSeries, Some(_)) => node.aux = self.kinetic_energy(p)?,
            (AlgebraKind::Undeformed, _) => {}
        }
        Ok(node)
    }

    /// Kernel value for two prepared nodes. Arguments are put in ascending
    /// order first, so the result is bitwise symmetric.
    pub(crate) fn kernel_pair(&self, a: &KernelNode, b: &KernelNode) -> f64 {
        let (a, b) = if a.p <= b.p { (a, b) } else { (b, a) };
        let gap = b.p - a.p;
        if gap == 0.0 {
            return a.dt;
        }
        if gap < self.diagonal_threshold() {
            return 0.5 * (a.dt + b.dt);
        }
        let two_m = 2.0 * self.mass;
        if self.is_undeformed() {
            return (a.p + b.p) / two_m;
        }
        let sb = self.beta.sqrt();
        match (self.kind, self.closed_form) {
            (AlgebraKind::KempfTan, _) => {
                // tan a - tan b = sin(a - b) / (cos a cos b)
                sinc(sb * gap) * (a.f + b.f) / (two_m * sb * a.aux * b.aux)
            }
            (AlgebraKind::UserSeries, None) => {
                // (f(u) - f(v)) / (u - v) = Σ c_k h_{2k}(u, v), with h_m the
                // complete homogeneous polynomial of degree m.
                let (u, v) = (a.u, b.u);
                let mut h = 1.0;
                let mut v_pow = 1.0;
                let mut quotient = self.f_series[0];
                for &c in &self.f_series[1..] {
                    for _ in 0..2 {
                        v_pow *= v;
                        h = u * h + v_pow;
                    }
                    quotient += c * h;
                }
                quotient * (a.f + b.f) / (two_m * sb)
            }
            _ => (b.aux - a.aux) / gap,
        }
    }

    fn check_monotone(&self) -> Result<()> {
        if self.beta == 0.0 || !self.momentum_bound.is_finite() {
            return Ok(());
        }
        let u_max = self.beta.sqrt() * self.momentum_bound;
        for i in 0..MONOTONICITY_SAMPLES {
            let u = u_max * i as f64 / (MONOTONICITY_SAMPLES - 1) as f64;
            let d = self.eval_f_prime(u)?;
            if d.is_nan() || d <= 0.0 {
                return Err(Error::InvalidSpec(format!(
                    "f is not strictly increasing: f'({u}) = {d}"
                )));
            }
        }
        Ok(())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidSpec(format!("beta must be finite and ≥ 0, got {beta}")));
    }
    Ok(())
}

fn sinc(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Per-momentum data reused by every kernel evaluation touching that node.
#[derive(Clone, Copy, Debug)]
pub(crate) struct KernelNode {
    p: f64,
    u: f64,
    f: f64,
    /// `cos u` for the tan algebra, `T(p)` for closed-form user series.
    aux: f64,
    dt: f64,
}

impl KernelNode {
    pub(crate) fn derivative(&self) -> f64 {
        self.dt
    }
}

/// Taylor coefficients `a_1..a_N` of the kinetic energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticCoefficients {
    coeffs: Vec<f64>,
}

impl KineticCoefficients {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("no kinetic coefficients".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `a_n`, one-based.
    pub fn a(&self, n: usize) -> f64 {
        self.coeffs[n - 1]
    }

    /// Partial sum `(1/2m) Σ_{n ≤ N} a_n β^{n-1} p^{2n}`.
    pub fn kinetic_energy(&self, beta: f64, mass: f64, p: f64) -> f64 {
        let p2 = p * p;
        let series = PowerSeries::new(self.coeffs.clone());
        p2 * series.eval(beta * p2) / (2.0 * mass)
    }

    /// `|a_N β^{N-1} p_max^{2N}| / 2m`, the size of the last retained term of
    /// the kinetic-energy series.
    pub fn truncation_estimate(&self, beta: f64, mass: f64, p_max: f64) -> f64 {
        let n = self.order();
        (self.a(n) * beta.powi(n as i32 - 1) * p_max.powi(2 * n as i32)).abs() / (2.0 * mass)
    }
}
