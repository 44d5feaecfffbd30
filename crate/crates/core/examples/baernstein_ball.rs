//! The Baernstein derived set is a ball: exact norms, the (M*) failure and a
//! certified point near the analytic radius.

use szlenk_lab::baernstein::{b_ball_radius, b_membership_witness, b_norm, b_norm_exact, mstar_failure_demo};
use szlenk_lab::szlenk::validate_certificate;
use szlenk_lab::SparseVec;

fn main() -> szlenk_lab::Result<()> {
    let v = SparseVec::from_pairs([(2, 1.0), (3, 0.1), (4, 1.0)])?;
    println!("‖v‖_B = {} (branch and bound {})", b_norm(&v).value, b_norm_exact(&v, 14)?.value);

    let demo = mstar_failure_demo()?;
    println!("{}", serde_json::to_string_pretty(&demo)?);

    let eps = 1.0;
    let radius = b_ball_radius(eps)?;
    let x0 = SparseVec::unit(1).scale(&(radius - 0.005));
    let cert = b_membership_witness(&x0, eps, &Default::default())?;
    println!(
        "radius {radius:.6}: certificate at {:.6} with {} pairs, valid = {}",
        radius - 0.005,
        cert.pairs.len(),
        validate_certificate(&cert)?
    );
    Ok(())
}
