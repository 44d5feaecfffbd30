//! The constrained minimization behind the Orlicz non-ball argument.

use szlenk_lab::orlicz::{claim_check, first_n_above_one, kkt_minimize, OrliczParams};

fn main() -> szlenk_lab::Result<()> {
    let p = OrliczParams::new(3.0, 2.0)?;
    let ared = p.reduced();
    let n = first_n_above_one(ared)?;
    println!("A = {}, B = {}, reduced A = {ared}, n = {n}", p.a, p.b);
    for mu in [0.5, 1.0, 2.0] {
        let r = kkt_minimize(mu, n, ared, 1e-8)?;
        println!(
            "μ = {mu}: min {:.10} at (s,t) = ({:.6}, {:.6}), V₂ = {:.10}, V₁ = {:.10}, μ₂ = {:.4}, {:?}",
            r.grid_min, r.argmin_s, r.argmin_t, r.v2, r.v1, r.mu2, r.case_label
        );
    }
    let claim = claim_check(n, ared, 2000, 7, 1e-10)?;
    println!("claim: {} samples, {} violations, min margin {:.3e}", claim.samples, claim.violations, claim.min_margin);
    Ok(())
}
