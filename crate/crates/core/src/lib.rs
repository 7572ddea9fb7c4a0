//! Probability current and continuity checks for one-dimensional quantum
//! states under deformed Heisenberg algebras `[X, P] = iħF(√β P)` with a
//! minimal length `ħ√β`.
//!
//! The algebra is given by an odd deformation function `f` with
//! `P = f(√β p)/√β`, from which [`algebra::DeformationSpec`] derives the
//! kinetic energy `T(p)`, its series coefficients and the divided-difference
//! kernel. States live either as exact plane-wave superpositions
//! ([`states::SpectralState`]) or as sampled band-limited amplitudes
//! ([`states::GridState`], [`states::CoordinateState`]). The current `j(x)`
//! is available as a truncated operator series and in closed momentum-space
//! form ([`flux`]); [`evolution`] evolves states and measures
//! `∂ρ/∂t + ∂j/∂x`.
//!
//! ```
//! use mlflux::algebra::DeformationSpec;
//! use mlflux::flux::flux_plane_wave;
//! use num_complex::Complex64;
//!
//! let spec = DeformationSpec::kempf_tan(1.0).unwrap();
//! let j = flux_plane_wave(&spec, Complex64::new(1.0, 0.0), std::f64::consts::FRAC_PI_4).unwrap();
//! assert!((j - 2.0).abs() < 1e-12);
//! ```

pub mod algebra;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod flux;
pub mod io;
pub mod series;
mod spectral;
pub mod states;

pub use error::{Error, Result};
