//! The Schlumprecht norm
//!
//! ```text
//! ‖ξ‖_S = max{ ‖ξ‖_∞ , sup_{E₁<…<E_n} 1/φ(n) Σ_j ‖E_j ξ‖_S },   φ(n) = log₂(n+1),
//! ```
//!
//! together with the radius formulas of its dual ball derivations.
//!
//! There is no admissibility constraint on the families, so the dynamic
//! program never drops a prefix: covering partitions dominate by
//! unconditionality. The subset oracle checks this.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, precondition, Result};
use crate::implicit::{interval_norm, subset_oracle, NormResult, Rule};
use crate::sampling::{largest_feasible_scale, sample_ball_neighbor, sample_rng, TailBoundReport};
use crate::szlenk::{DerivationCertificate, PerturbationPair, Space};
use crate::vecspace::{FamilyKind, SparseVec};

/// Consecutive rising terms after which [`s_r_upper_bound`] stops scanning.
pub const EARLY_STOP_RUN: usize = 50;

/// Default scan length of [`s_r_upper_bound`].
pub const DEFAULT_N_MAX: usize = 10_000_000;

/// `φ(n) = log₂(n+1)`.
pub fn phi(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(domain("φ(n) needs n >= 1"));
    }
    Ok(phi_unchecked(n))
}

pub(crate) fn phi_unchecked(n: usize) -> f64 {
    ((n + 1) as f64).log2()
}

fn rule(weight: &dyn Fn(usize) -> f64) -> Rule<'_, f64> {
    Rule {
        kind: FamilyKind::Schlumprecht,
        prefix_drop: false,
        max_blocks: |_| usize::MAX,
        weight,
    }
}

fn inv_phi(k: usize) -> f64 {
    1.0 / phi_unchecked(k)
}

/// `‖v‖_S` with its attaining partition tree.
pub fn s_norm(v: &SparseVec) -> NormResult {
    interval_norm(v, &rule(&inv_phi))
}

/// `‖v‖_S` by exhaustive search over successive families of arbitrary subsets.
pub fn s_norm_oracle(v: &SparseVec, cap: usize) -> Result<f64> {
    subset_oracle(v, &rule(&inv_phi), cap)
}

/// `R(ε) = min{1, log₂3 − ε/2}`.
#[allow(non_snake_case)]
pub fn s_R_curve(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(1f64.min(phi_unchecked(2) - eps / 2.0))
}

/// `inf_n (log₂(n+2) − ε/2)/log₂(n+1)` over `n ≤ n_max`, with the argmin.
///
/// The terms tend to 1, so the scan stops once they have risen above the
/// running minimum for [`EARLY_STOP_RUN`] consecutive `n`.
pub fn s_r_upper_bound(eps: f64, n_max: usize) -> Result<(f64, usize)> {
    check_eps(eps)?;
    let term = |n: usize| (((n + 2) as f64).log2() - eps / 2.0) / phi_unchecked(n);
    let (mut best, mut arg) = (term(1), 1);
    let (mut prev, mut rising) = (best, 0usize);
    for n in 2..=n_max.max(1) {
        let t = term(n);
        if t < best {
            best = t;
            arg = n;
        }
        if t > prev && t > best {
            rising += 1;
            if rising >= EARLY_STOP_RUN {
                break;
            }
        } else {
            rising = 0;
        }
        prev = t;
    }
    Ok((best, arg))
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 2.0 {
        Ok(())
    } else {
        Err(domain(format!("ε must lie in (0,2), got {eps}")))
    }
}

/// Membership certificate for `x₀ ∈ s_ε B` from the pairs `x₀ ± (ε′/2) e_k`
/// for `k` beyond the support of `x₀`.
///
/// For `x₀ = r·e₁` the construction works exactly when `r ≤ 1` and
/// `r < φ(2) − ε/2`. For general `x₀` it needs `‖x₀ + (ε/2)e_k‖_S < 1`.
pub fn s_membership_witness(x0: &SparseVec, eps: f64, pairs: usize) -> Result<DerivationCertificate> {
    check_eps(eps)?;
    let k0 = x0.max_support().unwrap_or(0) + 1;
    let x0_norm = s_norm(x0).value;
    if let Some(r) = single_first_coordinate(x0) {
        if r > 1.0 {
            return Err(precondition(format!("r <= 1 fails (r = {r})")));
        }
        if r >= phi_unchecked(2) - eps / 2.0 {
            return Err(precondition(format!(
                "r < φ(2) − ε/2 fails ({r} >= {})",
                phi_unchecked(2) - eps / 2.0
            )));
        }
    } else if x0_norm > 1.0 {
        return Err(precondition(format!("‖x0‖_S <= 1 fails ({x0_norm})")));
    }
    let norm = |v: &SparseVec| s_norm(v).value;
    let c_max = largest_feasible_scale(norm, x0, &SparseVec::unit(k0), 1.0, 1.0);
    if 2.0 * c_max <= eps {
        return Err(precondition(format!(
            "‖x0 + (ε/2)e_k‖_S < 1 fails (largest admissible step {c_max}, need > {})",
            eps / 2.0
        )));
    }
    let eps_prime = 0.5 * (eps + 2.0 * c_max);
    let c = eps_prime / 2.0;
    let list = (k0..k0 + pairs.max(1))
        .map(|k| {
            let step = SparseVec::unit(k).scale(&c);
            PerturbationPair {
                plus: x0.add(&step),
                minus: x0.sub(&step),
            }
        })
        .collect();
    Ok(DerivationCertificate {
        point: x0.clone(),
        eps,
        pairs: list,
        space: Space::Schlumprecht,
        coord_horizon: k0,
        construction: format!("schlumprecht x0 ± (ε′/2)e_k, ε′={eps_prime:.6}, k from {k0}"),
    })
}

fn single_first_coordinate(x0: &SparseVec) -> Option<f64> {
    match x0.entries() {
        [(1, r)] => Some(r.abs()),
        _ => None,
    }
}

/// Parameters of the tail estimate `‖(I − P_N)y‖_S ≤ φ(2) − ‖P_N x₀‖ + Nδ`.
#[derive(Clone, Debug, Serialize)]
pub struct SchlumprechtTailSetup {
    pub x0: SparseVec,
    pub eps: f64,
    pub eps_prime: f64,
    pub n: usize,
    pub delta: f64,
}

impl SchlumprechtTailSetup {
    /// `x₀ = e₁`, `N = 1`, with `ε′` and `δ` at the midpoints of their ranges.
    pub fn centered(eps: f64) -> Self {
        let low = 2.0 * (phi_unchecked(2) - 1.0);
        let eps_prime = 0.5 * (low + eps);
        Self {
            x0: SparseVec::unit(1),
            eps,
            eps_prime,
            n: 1,
            delta: 0.5 * (eps - eps_prime) / 6.0,
        }
    }

    fn check(&self) -> Result<f64> {
        let phi2 = phi_unchecked(2);
        let x0_norm = s_norm(&self.x0).value;
        if !(self.n >= 1) {
            return Err(precondition("N >= 1"));
        }
        if !(phi2 - self.eps / 2.0 < x0_norm && x0_norm <= 1.0) {
            return Err(precondition(format!(
                "φ(2) − ε/2 < ‖x0‖ <= 1 fails (‖x0‖ = {x0_norm})"
            )));
        }
        if !(self.eps_prime > 2.0 * (phi2 - 1.0) && self.eps_prime < self.eps) {
            return Err(precondition("ε′ ∈ (2(φ(2)−1), ε) fails"));
        }
        let head = s_norm(&self.x0.head_proj(self.n)).value;
        if !(head > phi2 - self.eps_prime / 2.0) {
            return Err(precondition(format!(
                "‖P_N x0‖ > φ(2) − ε′/2 fails ({head})"
            )));
        }
        if !(self.delta > 0.0 && self.delta < (self.eps - self.eps_prime) / (6.0 * self.n as f64)) {
            return Err(precondition("0 < δ < (ε − ε′)/(6N) fails"));
        }
        Ok(head)
    }
}

/// Samples `y` with `‖y‖_S ≤ 1` and `|y_i − x₀_i| < δ` for `i ≤ N` and checks
/// the tail bound on every sample.
pub fn s_tailbound_check(setup: &SchlumprechtTailSetup, samples: usize, seed: u64) -> Result<TailBoundReport> {
    let head = setup.check()?;
    let bound = phi_unchecked(2) - head + setup.n as f64 * setup.delta;
    let norm = |v: &SparseVec| s_norm(v).value;
    let outcomes: Vec<Option<f64>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, 0x5c41, k as u32);
            for _ in 0..16 {
                let width = rng.gen_range(1..=6);
                if let Some(y) = sample_ball_neighbor(&mut rng, &norm, &setup.x0, setup.n, setup.delta, width) {
                    return Some(norm(&y.tail_proj(setup.n)));
                }
            }
            None
        })
        .collect();
    Ok(TailBoundReport::from_tails(&outcomes, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn phi_values() {
        assert_eq!(phi(1).unwrap(), 1.0);
        assert_eq!(phi(3).unwrap(), 2.0);
        assert!((phi(2).unwrap() - 1.584962500721156).abs() < 1e-15);
        assert!(matches!(phi(0), Err(Error::Domain(_))));
    }

    #[test]
    fn small_norms() {
        assert!((s_norm(&SparseVec::indicator(1..=3)).value - 1.5).abs() < 1e-12);
        assert!((s_norm(&SparseVec::indicator(1..=2)).value - 2.0 / 3f64.log2()).abs() < 1e-12);
        assert_eq!(s_norm(&SparseVec::unit(7)).value, 1.0);
        let four = s_norm_oracle(&SparseVec::indicator(1..=4), 9).unwrap();
        assert!((four - 4.0 / 5f64.log2()).abs() < 1e-12);
        assert_eq!(s_norm_oracle(&SparseVec::unit(1).scale(&2.0), 9).unwrap(), 2.0);
    }

    #[test]
    fn radius_formulas() {
        assert_eq!(s_R_curve(0.5).unwrap(), 1.0);
        assert!((s_R_curve(1.5).unwrap() - (3f64.log2() - 0.75)).abs() < 1e-15);
        assert!(s_R_curve(2.0).is_err());
        let (v, n) = s_r_upper_bound(1.0, 100).unwrap();
        assert_eq!(n, 7);
        assert!((v - 0.8899750).abs() < 1e-6);
    }

    #[test]
    fn witnesses() {
        let half = SparseVec::unit(1).scale(&0.5);
        let cert = s_membership_witness(&half, 1.0, 3).unwrap();
        assert!(crate::szlenk::validate_certificate(&cert).unwrap());
        let cert = s_membership_witness(&SparseVec::zero(), 1.9, 3).unwrap();
        assert!(crate::szlenk::validate_certificate(&cert).unwrap());
        let big = SparseVec::unit(1).scale(&1.2);
        assert!(matches!(s_membership_witness(&big, 1.5, 3), Err(Error::Precondition(_))));
    }

    #[test]
    fn tail_bound_examples() {
        let setup = SchlumprechtTailSetup {
            x0: SparseVec::unit(1).scale(&0.99),
            eps: 1.9,
            eps_prime: 1.5,
            n: 1,
            delta: 0.05,
        };
        assert!(s_tailbound_check(&setup, 50, 3).unwrap().passed);
        let too_wide = SchlumprechtTailSetup { delta: 0.2, ..setup };
        assert!(matches!(s_tailbound_check(&too_wide, 10, 3), Err(Error::Precondition(_))));
    }
}
