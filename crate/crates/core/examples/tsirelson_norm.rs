//! Tsirelson norms of a few vectors, in floating point and exactly.

use szlenk_lab::tsirelson::{t_block_norm, t_norm, t_norm_exact, t_norm_oracle};
use szlenk_lab::SparseVec;

fn main() -> szlenk_lab::Result<()> {
    let v = SparseVec::from_pairs([(2, 1.0), (3, -0.5), (5, 2.0), (6, 1.0), (9, 0.25)])?;
    let res = t_norm(&v);
    println!("‖v‖_T = {}  (oracle {})", res.value, t_norm_oracle(&v, 9)?);
    println!("witness: {}", serde_json::to_string(&res.witness)?);

    let exact = t_norm_exact(&SparseVec::from_ratios([(3, 1, 1), (4, 1, 3), (5, -2, 3), (7, 1, 2)])?);
    println!("exact norm: {}", exact.value);

    for a in [4, 8, 12] {
        println!("‖e_{a} + … + e_{}‖_T = {}", 2 * a - 1, t_block_norm(a, a)?);
    }
    Ok(())
}
