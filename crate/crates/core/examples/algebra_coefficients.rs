//! Kinetic-energy Taylor coefficients and the truncation estimate.
//!
//! `cargo run --example algebra_coefficients -- 1.0 12`

use mlflux::algebra::DeformationSpec;

fn main() -> mlflux::Result<()> {
    let mut args = std::env::args().skip(1);
    let beta: f64 = args.next().map_or(1.0, |s| s.parse().expect("beta"));
    let order: usize = args.next().map_or(10, |s| s.parse().expect("order"));

    let spec = DeformationSpec::kempf_tan(beta)?;
    let coeffs = spec.taylor_coeffs(order)?;
    println!("momentum bound {:.6}, minimal length {:.6}", spec.momentum_bound(), spec.minimal_length());
    for (n, a) in coeffs.coeffs().iter().enumerate() {
        println!("a_{:<3} {a:.16e}", n + 1);
    }
    for p in [0.1, 0.3, 0.5].map(|f| f * spec.momentum_bound()) {
        let exact = spec.kinetic_energy(p)?;
        let series = coeffs.kinetic_energy(beta, spec.mass(), p);
        let estimate = coeffs.truncation_estimate(beta, spec.mass(), p);
        println!("p={p:.4}  T={exact:.12e}  |T-T_N|={:.3e}  estimate={estimate:.3e}", (exact - series).abs());
    }
    Ok(())
}
