//! The Figiel–Johnson norm `‖·‖_T`, the dual norm of the original Tsirelson
//! space, given by the implicit formula
//!
//! ```text
//! ‖ξ‖_T = max{ ‖ξ‖_∞ , sup_{k ≤ E₁ < … < E_k} ½ Σ_j ‖E_j ξ‖_T }.
//! ```
//!
//! [`t_norm`] runs the interval dynamic program (exact in [`Rational`]
//! mode); [`t_norm_oracle`] enumerates every admissible family of arbitrary
//! subsets and exists to check it.
//!
//! The interval program only considers families made of contiguous runs of
//! support positions after an optional dropped prefix. Interior gaps never
//! help: the norm is 1-unconditional, so absorbing a skipped point into the
//! following block can only increase that block's norm, and doing so keeps
//! both the block count and `min E₁`. A dropped prefix is different, because
//! it raises `min E₁` and with it the admissible number of blocks.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, precondition, Error, Result};
use crate::implicit::{interval_norm, subset_oracle, NormResult, Rule};
use crate::sampling::{sample_ball_neighbor, sample_rng, TailBoundReport};
use crate::szlenk::{DerivationCertificate, PerturbationPair, Space};
use crate::vecspace::{FamilyKind, Rational, Scalar, SparseVec};

/// Default support cap of the exhaustive oracles.
pub const DEFAULT_ORACLE_CAP: usize = 9;

fn rule<S: Scalar>(half: &dyn Fn(usize) -> S) -> Rule<'_, S> {
    Rule {
        kind: FamilyKind::Tsirelson,
        prefix_drop: true,
        max_blocks: |first| first,
        weight: half,
    }
}

fn half<S: Scalar>(_: usize) -> S {
    S::one().half()
}

/// `‖v‖_T` with its attaining partition tree.
pub fn t_norm<S: Scalar>(v: &SparseVec<S>) -> NormResult<S> {
    interval_norm(v, &rule(&half::<S>))
}

/// Exact `‖v‖_T` of a rational vector.
pub fn t_norm_exact(v: &SparseVec<Rational>) -> NormResult<Rational> {
    t_norm(v)
}

/// `‖v‖_T` by exhaustive search over admissible families of arbitrary subsets.
pub fn t_norm_oracle<S: Scalar>(v: &SparseVec<S>, cap: usize) -> Result<S> {
    subset_oracle(v, &rule(&half::<S>), cap)
}

/// `‖e_a + … + e_{a+m−1}‖_T = m/2` for `2 ≤ m ≤ a`, verified exactly.
pub fn t_block_norm(a: usize, m: usize) -> Result<f64> {
    if !(2 <= m && m <= a) {
        return Err(domain(format!(
            "block norm formula needs 2 <= m <= a, got a={a}, m={m}"
        )));
    }
    let block = SparseVec::<Rational>::indicator(a..=a + m - 1);
    let got = t_norm_exact(&block).value;
    let expected = Rational::new((m as i64).into(), 2.into());
    if got != expected {
        return Err(Error::CheckFailed(format!(
            "‖e_{a}+…+e_{}‖_T = {got} but expected {expected}",
            a + m - 1
        )));
    }
    Ok(m as f64 / 2.0)
}

/// Measurements behind [`t_xnorm_certify`].
#[derive(Clone, Debug, Serialize)]
pub struct XNormReport {
    pub n_max_support: usize,
    pub alpha: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub gap: f64,
    pub expected_gap: f64,
    /// `max{1, ½mα, ¼(2N+m)α}` as displayed.
    pub displayed_bound: f64,
    /// `max{‖x₀‖_∞, α, ½mα, ‖x₀‖_T + ¼(2N+m)α}`, the bound the case analysis
    /// actually establishes.
    pub sharp_bound: f64,
    pub passed: bool,
}

/// The perturbation `x₀ ± α(e_{N+k+1} + … + e_{N+k+m})` with `α = ε′/(2N+m)`.
pub fn x_pair(x0: &SparseVec, k: usize, m: usize, eps_prime: f64) -> (SparseVec, SparseVec, f64) {
    let n = x0.max_support().unwrap_or(0);
    let alpha = eps_prime / (2 * n + m) as f64;
    let block = SparseVec::<f64>::indicator(n + k + 1..=n + k + m).scale(&alpha);
    (x0.add(&block), x0.sub(&block), alpha)
}

/// Evaluates the perturbations `x_{k,m,±}` and reports every quantity the
/// lower-radius argument relies on.
pub fn t_xnorm_report(x0: &SparseVec, k: usize, m: usize, eps_prime: f64, tol: f64) -> Result<XNormReport> {
    let n = x0.max_support().unwrap_or(0);
    if k == 0 || !(2 <= m && m <= n + k) {
        return Err(precondition(format!("2 <= m <= N+k fails (N={n}, k={k}, m={m})")));
    }
    if !(eps_prime > 0.0 && eps_prime < 2.0) {
        return Err(precondition(format!("ε′ ∈ (0,2) fails (ε′={eps_prime})")));
    }
    let x0_norm = t_norm(x0).value;
    if x0_norm >= 1.0 - eps_prime / 4.0 {
        return Err(precondition(format!(
            "‖x0‖_T < 1 − ε′/4 fails ({x0_norm} >= {})",
            1.0 - eps_prime / 4.0
        )));
    }
    let (plus, minus, alpha) = x_pair(x0, k, m, eps_prime);
    let norm_plus = t_norm(&plus).value;
    let norm_minus = t_norm(&minus).value;
    let gap = t_norm(&plus.sub(&minus)).value;
    let expected_gap = m as f64 * eps_prime / (2 * n + m) as f64;
    let quarter = 0.25 * (2 * n + m) as f64 * alpha;
    let displayed_bound = 1f64.max(0.5 * m as f64 * alpha).max(quarter);
    let sharp_bound = x0
        .max_abs()
        .max(alpha)
        .max(0.5 * m as f64 * alpha)
        .max(x0_norm + quarter);
    let passed = norm_plus <= 1.0 + tol
        && norm_minus <= 1.0 + tol
        && (gap - expected_gap).abs() <= tol
        && norm_plus.max(norm_minus) <= displayed_bound + tol
        && norm_plus.max(norm_minus) <= sharp_bound + tol;
    Ok(XNormReport {
        n_max_support: n,
        alpha,
        norm_plus,
        norm_minus,
        gap,
        expected_gap,
        displayed_bound,
        sharp_bound,
        passed,
    })
}

/// True iff `‖x_{k,m,±}‖_T ≤ 1`, `‖x_{k,m,+} − x_{k,m,−}‖_T = mε′/(2N+m)` and
/// the norm bound of the case analysis holds.
pub fn t_xnorm_certify(x0: &SparseVec, k: usize, m: usize, eps_prime: f64) -> Result<bool> {
    Ok(t_xnorm_report(x0, k, m, eps_prime, crate::vecspace::DEFAULT_TOL)?.passed)
}

/// Membership certificate for `x₀ ∈ s_ε B_T` built from the pairs
/// `x_{m,m,±}`, for `m` from the first value whose gap exceeds `ε`.
///
/// Requires `‖x₀‖_T < 1 − ε/4`. `max_support` bounds the support of the
/// perturbed vectors (the required block length grows like
/// `2Nε/(ε′−ε)` as `‖x₀‖` approaches the radius).
pub fn t_membership_witness(
    x0: &SparseVec,
    eps: f64,
    pairs: usize,
    max_support: usize,
) -> Result<DerivationCertificate> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(domain(format!("ε must lie in (0,2), got {eps}")));
    }
    let x0_norm = t_norm(x0).value;
    let eps_top = (4.0 * (1.0 - x0_norm)).min(2.0);
    if x0_norm >= 1.0 - eps / 4.0 {
        return Err(precondition(format!(
            "‖x0‖_T < 1 − ε/4 fails ({x0_norm} >= {})",
            1.0 - eps / 4.0
        )));
    }
    let eps_prime = eps + 0.9 * (eps_top - eps);
    let n = x0.max_support().unwrap_or(0);
    // smallest m >= 2 with m ε′/(2N+m) > ε, plus one for rounding headroom
    let mut m0 = if n == 0 {
        2
    } else {
        ((2 * n) as f64 * eps / (eps_prime - eps)).floor() as usize + 1
    };
    m0 = m0.max(2);
    while (m0 as f64) * eps_prime / ((2 * n + m0) as f64) <= eps * (1.0 + 1e-12) {
        m0 += 1;
    }
    let pairs = pairs.max(1);
    if x0.support_len() + m0 + pairs - 1 > max_support {
        return Err(precondition(format!(
            "support budget: block length {m0} needed, at most {} allowed",
            max_support.saturating_sub(x0.support_len())
        )));
    }
    let list = (m0..m0 + pairs)
        .map(|m| {
            let (plus, minus, _) = x_pair(x0, m, m, eps_prime);
            PerturbationPair { plus, minus }
        })
        .collect();
    Ok(DerivationCertificate {
        point: x0.clone(),
        eps,
        pairs: list,
        space: Space::Tsirelson,
        coord_horizon: n + m0 + 1,
        construction: format!("tsirelson x_(m,m,±), ε′={eps_prime:.6}, m from {m0}"),
    })
}

/// Parameters of the tail estimate around `x₀ = r(e_m + e_n)`.
#[derive(Clone, Debug, Serialize)]
pub struct TailBoundSetup {
    pub r: f64,
    pub m: usize,
    pub n: usize,
    pub eps: f64,
    pub eps_prime: f64,
    pub delta: f64,
}

impl TailBoundSetup {
    /// A setup with `r`, `ε′` and `δ` placed inside their admissible ranges.
    pub fn centered(m: usize, n: usize, eps: f64) -> Self {
        let eps_prime = 0.5 * eps;
        let r_low = 1.0 - eps_prime / 4.0;
        let r = 0.5 * (r_low + 1.0);
        let delta = 0.5 * (eps - eps_prime) / (6.0 * n as f64);
        Self {
            r,
            m,
            n,
            eps,
            eps_prime,
            delta,
        }
    }

    fn check(&self) -> Result<()> {
        if !(3 <= self.m && self.m < self.n) {
            return Err(precondition("3 <= m < n"));
        }
        if !(self.eps > 0.0 && self.eps < 2.0) {
            return Err(precondition("ε ∈ (0,2)"));
        }
        if !(self.eps_prime > 0.0 && self.eps_prime < self.eps) {
            return Err(precondition("ε′ ∈ (0, ε)"));
        }
        if !(self.r > 1.0 - self.eps_prime / 4.0 && self.r <= 1.0) {
            return Err(precondition("1 − ε′/4 < r <= 1"));
        }
        if !(self.delta > 0.0 && self.delta < (self.eps - self.eps_prime) / (6.0 * self.n as f64)) {
            return Err(precondition("0 < δ < (ε − ε′)/(6n)"));
        }
        Ok(())
    }
}

/// Samples `y` with `‖y‖_T ≤ 1` and `|y_i − x₀_i| < δ` for `i ≤ n` and checks
/// `‖(I − P_n) y‖_T ≤ 2(1 − r + nδ)`.
pub fn t_tailbound_check(setup: &TailBoundSetup, samples: usize, seed: u64) -> Result<TailBoundReport> {
    setup.check()?;
    let n = setup.n;
    let x0 = SparseVec::from_pairs([(setup.m, setup.r), (n, setup.r)])?;
    let bound = 2.0 * (1.0 - setup.r + n as f64 * setup.delta);
    let norm = |v: &SparseVec| t_norm(v).value;
    let outcomes: Vec<Option<f64>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, 0x7531, k as u32);
            for _ in 0..16 {
                let width = rng.gen_range(1..=6);
                if let Some(y) = sample_ball_neighbor(&mut rng, &norm, &x0, n, setup.delta, width) {
                    return Some(norm(&y.tail_proj(n)));
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

    fn f(pairs: &[(usize, f64)]) -> SparseVec {
        SparseVec::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(t_norm(&SparseVec::<f64>::unit(1)).value, 1.0);
        assert_eq!(t_norm(&SparseVec::<f64>::indicator(3..=5)).value, 1.5);
        assert_eq!(t_norm(&SparseVec::<f64>::indicator(2..=5)).value, 1.5);
        assert_eq!(t_norm(&SparseVec::<f64>::indicator(2..=3)).value, 1.0);
        assert_eq!(t_norm(&SparseVec::<f64>::zero()).value, 0.0);
    }

    #[test]
    fn prefix_drop_is_in_the_witness() {
        let v = SparseVec::<f64>::indicator(2..=5);
        let res = t_norm(&v);
        match &res.witness {
            crate::implicit::Witness::Family { family, .. } => {
                assert_eq!(family.len(), 3);
                assert_eq!(family.blocks[0].min(), 3);
            }
            other => panic!("expected a family, got {other:?}"),
        }
        assert!(res.witness_is_sound(&v, 1e-12));
    }

    #[test]
    fn oracle_agrees_on_examples() {
        assert_eq!(t_norm_oracle(&SparseVec::<f64>::unit(1), 9).unwrap(), 1.0);
        assert_eq!(t_norm_oracle(&SparseVec::<f64>::indicator(3..=5), 9).unwrap(), 1.5);
        assert_eq!(t_norm_oracle(&SparseVec::<f64>::indicator(2..=5), 9).unwrap(), 1.5);
        assert!(matches!(
            t_norm_oracle(&SparseVec::<f64>::indicator(1..=10), 9),
            Err(Error::CapExceeded { cap: 9, .. })
        ));
    }

    #[test]
    fn block_norm_examples() {
        assert_eq!(t_block_norm(5, 4).unwrap(), 2.0);
        assert_eq!(t_block_norm(3, 2).unwrap(), 1.0);
        assert_eq!(t_block_norm(10, 10).unwrap(), 5.0);
        assert!(matches!(t_block_norm(3, 4), Err(Error::Domain(_))));
        assert!(matches!(t_block_norm(3, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn xnorm_examples() {
        assert!(t_xnorm_certify(&f(&[(1, 0.5)]), 4, 4, 1.5).unwrap());
        assert!(t_xnorm_certify(&SparseVec::zero(), 2, 2, 1.0).unwrap());
        // ‖0.8 e₁‖ = 0.8 ≥ 1 − 1/4
        assert!(matches!(
            t_xnorm_certify(&f(&[(1, 0.8)]), 4, 4, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn xnorm_report_values() {
        let rep = t_xnorm_report(&f(&[(1, 0.5)]), 4, 4, 1.5, 1e-12).unwrap();
        assert_eq!(rep.alpha, 0.25);
        assert_eq!(rep.norm_plus, 0.5);
        assert_eq!(rep.gap, 1.0);
        assert_eq!(rep.expected_gap, 1.0);
    }

    #[test]
    fn membership_witness_builds_valid_certificate() {
        let cert = t_membership_witness(&f(&[(1, 0.74)]), 1.0, 2, 200).unwrap();
        assert!(crate::szlenk::validate_certificate(&cert).unwrap());
        assert!(matches!(
            t_membership_witness(&f(&[(1, 0.76)]), 1.0, 2, 200),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn tail_bound_small_run() {
        let setup = TailBoundSetup::centered(3, 5, 1.0);
        let rep = t_tailbound_check(&setup, 20, 1).unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}
