//! Loads a user-supplied deformation from JSON and compares it with the
//! built-in tangent algebra.

use mlflux::algebra::DeformationSpec;
use mlflux::io::read_deformation;
use mlflux::series::tan_odd_coeffs;

fn main() -> mlflux::Result<()> {
    let odd = tan_odd_coeffs(30);
    let doc = serde_json::json!({
        "beta": 1.0,
        "f_odd_coeffs": odd,
        "momentum_bound": std::f64::consts::FRAC_PI_2,
    });
    let user = read_deformation(doc.to_string().as_bytes())?;
    let kempf = DeformationSpec::kempf_tan(1.0)?;
    println!("{:>6} {:>20} {:>20}", "p", "user T'(p)", "tan T'(p)");
    for p in [0.1, 0.4, 0.8, 1.0] {
        println!("{p:>6.2} {:>20.14} {:>20.14}", user.kinetic_derivative(p)?, kempf.kinetic_derivative(p)?);
    }
    let coeffs = user.taylor_coeffs(6)?;
    println!("a_n: {:?}", coeffs.coeffs());
    Ok(())
}
