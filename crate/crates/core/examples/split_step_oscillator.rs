//! Split-step evolution in a harmonic well, tracking ⟨x⟩ and the norm.

use std::sync::Arc;

use mlflux::algebra::DeformationSpec;
use mlflux::evolution::evolve_split_step;
use mlflux::states::{GaussianPacket, GridState, MomentumGrid};

fn main() -> mlflux::Result<()> {
    for spec in [DeformationSpec::undeformed(), DeformationSpec::kempf_tan(0.05)?] {
        let spec = Arc::new(spec);
        let state = GridState::gaussian(Arc::clone(&spec), MomentumGrid::new(256, 6.0)?, GaussianPacket::new(1.0, 0.7))?;
        let mut psi = state.to_coordinate()?;
        let potential: Vec<f64> = psi.x().iter().map(|x| 0.5 * x * x).collect();
        println!("{}", spec.kind());
        for _ in 0..8 {
            psi = evolve_split_step(&psi, &potential, 0.01, 50)?;
            println!("  t={:.2}  <x>={:+.6}  norm={:.12}", psi.time(), psi.mean_position(), psi.norm());
        }
    }
    Ok(())
}
