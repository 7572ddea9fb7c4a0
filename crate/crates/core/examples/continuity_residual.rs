//! Continuity residual ∂ρ/∂t + ∂j/∂x for several derivative routes.

use std::sync::Arc;

use mlflux::algebra::DeformationSpec;
use mlflux::evolution::{continuity_residual, CurrentMethod, ResidualInput, ResidualOptions, RhoMethod};
use mlflux::states::{GaussianPacket, GridState, MomentumGrid};

fn main() -> mlflux::Result<()> {
    let spec = Arc::new(DeformationSpec::kempf_tan(1.0)?);
    let state = GridState::gaussian(spec, MomentumGrid::new(512, 0.5)?, GaussianPacket::new(0.05, 0.1))?;
    let routes = [
        ResidualOptions::new(RhoMethod::Analytic, CurrentMethod::Closed),
        ResidualOptions::new(RhoMethod::Series(16), CurrentMethod::Series(16)),
        ResidualOptions::new(RhoMethod::FiniteDifference(None), CurrentMethod::Closed),
        ResidualOptions { rho: RhoMethod::Series(2), current: CurrentMethod::Series(8), allow_order_mismatch: true },
    ];
    for opts in routes {
        let r = continuity_residual(ResidualInput::Grid(&state), opts)?;
        println!(
            "{:>18} / {:<12} max {:.3e}  relative {:.3e}",
            r.rho_method,
            r.j_method,
            r.max_abs,
            r.relative_max()
        );
    }
    Ok(())
}
