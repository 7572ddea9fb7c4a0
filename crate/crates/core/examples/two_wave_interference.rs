//! Interference term of two plane waves, printed as a CSV profile.

use std::sync::Arc;

use mlflux::algebra::DeformationSpec;
use mlflux::flux::flux_closed_spectral;
use mlflux::states::two_wave;
use num_complex::Complex64;

fn main() -> mlflux::Result<()> {
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0)?);
    let (p1, p2) = (0.9, -0.4);
    let state = two_wave(spec, Complex64::new(1.0, 0.0), p1, Complex64::from_polar(0.7, 0.3), p2, 0.0)?;
    let period = 2.0 * std::f64::consts::PI / (p1 - p2);
    let xs: Vec<f64> = (0..=40).map(|i| period * i as f64 / 20.0).collect();
    let j = flux_closed_spectral(&state, &xs, 0.0)?;
    println!("x,j");
    for (x, v) in xs.iter().zip(&j.values) {
        println!("{x:.6},{v:.12e}");
    }
    Ok(())
}
