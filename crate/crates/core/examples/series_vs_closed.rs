//! Truncated series current against the closed form for a Gaussian packet.

use std::sync::Arc;

use mlflux::algebra::DeformationSpec;
use mlflux::flux::{flux_closed_grid_fine, flux_series};
use mlflux::states::{GaussianPacket, GridState, MomentumGrid};

fn main() -> mlflux::Result<()> {
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0)?);
    let grid = MomentumGrid::new(512, 0.6)?;
    let state = GridState::gaussian(Arc::clone(&spec), grid, GaussianPacket::new(0.1, 0.1))?;
    let closed = flux_closed_grid_fine(&state)?;
    let fine = state.to_coordinate_oversampled(2)?;
    println!("{:>4} {:>14} {:>14}", "N", "max diff", "estimate");
    for order in [1, 2, 4, 8, 12, 16] {
        let series = flux_series(&fine, &spec.taylor_coeffs(order)?, order)?;
        println!(
            "{order:>4} {:>14.4e} {:>14.4e}",
            series.max_abs_difference(&closed),
            series.truncation_estimate.unwrap_or(0.0)
        );
    }
    println!("max|j| = {:.6e}", closed.max_abs());
    Ok(())
}
