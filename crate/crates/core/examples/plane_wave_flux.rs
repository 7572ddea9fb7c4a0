//! A single plane wave carries the constant current |A|² T'(p₀).

use std::sync::Arc;

use mlflux::algebra::DeformationSpec;
use mlflux::flux::{flux_closed_spectral, flux_plane_wave};
use mlflux::states::plane_wave;
use num_complex::Complex64;

fn main() -> mlflux::Result<()> {
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0)?);
    let free = Arc::new(DeformationSpec::undeformed());
    let xs: Vec<f64> = (0..5).map(|i| -4.0 + 2.0 * i as f64).collect();
    println!("{:>8} {:>14} {:>14}", "p0", "deformed", "undeformed");
    for p0 in [0.1, 0.4, std::f64::consts::FRAC_PI_4, 1.2, 1.5] {
        let j = flux_plane_wave(&spec, Complex64::new(1.0, 0.0), p0)?;
        let j0 = flux_plane_wave(&free, Complex64::new(1.0, 0.0), p0)?;
        println!("{p0:>8.4} {j:>14.8} {j0:>14.8}");
    }

    let wave = plane_wave(Arc::clone(&spec), Complex64::from_polar(0.5, 1.0), 0.6, 0.0)?;
    let profile = flux_closed_spectral(&wave, &xs, 3.0)?;
    println!("sampled profile at x = {xs:?}: {:?}", profile.values);
    Ok(())
}
