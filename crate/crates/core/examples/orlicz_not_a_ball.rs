//! Two points of equal norm, one inside s_ε B and one outside.

use szlenk_lab::orlicz::not_a_ball_demo;

fn main() -> szlenk_lab::Result<()> {
    for eps in [0.1, 0.5, 1.0, 1.5, 1.9] {
        let r = not_a_ball_demo(3.0, eps, 500, 2, 11)?;
        println!(
            "ε = {eps}: δ = {:.6}, a = {:.6}, radius r/a = {:.6}, certificate {}, margin {:.3e}, passed {}",
            r.inversion.delta, r.inversion.a, r.scaled_radius, r.membership_valid, r.min_margin, r.passed
        );
    }
    Ok(())
}
