//! Schlumprecht norms of flat vectors and the bounds on r(ε), R(ε).

use szlenk_lab::schlumprecht::{phi, s_R_curve, s_norm, s_r_upper_bound, DEFAULT_N_MAX};
use szlenk_lab::SparseVec;

fn main() -> szlenk_lab::Result<()> {
    for n in [1, 2, 5, 10, 25] {
        let v = s_norm(&SparseVec::indicator(1..=n)).value;
        println!("n = {n:2}: ‖Σe_j‖_S = {v:.12}, n/φ(n) = {:.12}", n as f64 / phi(n)?);
    }
    println!("\n  eps   lower   upper (argmin n)   R");
    for eps in [0.1, 0.5, 1.0, 1.5, 1.9] {
        let (up, n) = s_r_upper_bound(eps, DEFAULT_N_MAX)?;
        println!("{eps:5.2}  {:.5}  {up:.5} ({n:5})       {:.5}", 1.0 - eps / 2.0, s_R_curve(eps)?);
    }
    Ok(())
}
