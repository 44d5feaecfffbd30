//! The Baernstein norm
//!
//! ```text
//! ‖x‖_B = sup{ (Σ_i ‖E_i x‖²_{ℓ₁})^{1/2} : E₁ < … < E_n, |E_i| ≤ min E_i }
//! ```
//!
//! and the checks around its dual ball derivations.
//!
//! Three engines are provided:
//!
//! * [`b_norm_exact`] is a branch and bound over ordered families of
//!   admissible subsets, capped at [`DEFAULT_EXACT_CAP`] support points;
//! * [`b_norm`] is an uncapped window program. A block with least element
//!   `a` and largest element at most `b` contributes at most `|x_a|` plus the
//!   `a − 1` largest magnitudes in `(a, b]`, and that choice is admissible,
//!   so maximizing over ordered windows gives the norm exactly in
//!   `O(L² log L)`;
//! * [`b_norm_interval`] restricts blocks to consecutive support runs and
//!   is only a lower bound.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, precondition, Error, Result};
use crate::implicit::{NormResult, Witness};
use crate::sampling::{random_sparse, sample_rng};
use crate::szlenk::{mq_radius, DerivationCertificate, PerturbationPair, Space};
use crate::vecspace::{BlockFamily, FamilyKind, IndexSet, SparseVec};

/// Default support cap of [`b_norm_exact`].
pub const DEFAULT_EXACT_CAP: usize = 14;

/// Default support budget of [`b_membership_witness`].
pub const DEFAULT_MAX_SUPPORT: usize = 4096;

fn family_of(blocks: Vec<Vec<usize>>) -> Witness {
    let blocks = blocks
        .into_iter()
        .map(|b| IndexSet::new(b).expect("blocks are nonempty"))
        .collect();
    Witness::L1Blocks {
        family: BlockFamily::new(FamilyKind::Baernstein, blocks),
    }
}

fn zero_result() -> NormResult {
    NormResult {
        value: 0.0,
        witness: Witness::Zero,
    }
}

/// `‖v‖_B` by branch and bound over admissible subset families.
pub fn b_norm_exact(v: &SparseVec, cap: usize) -> Result<NormResult> {
    let l = v.support_len();
    if l > cap {
        return Err(Error::CapExceeded { cap, support: l });
    }
    if l == 0 {
        return Ok(zero_result());
    }
    let index: Vec<usize> = v.iter().map(|(i, _)| *i).collect();
    let mag: Vec<f64> = v.iter().map(|(_, x)| x.abs()).collect();
    let mut suffix = vec![0.0; l + 1];
    for p in (0..l).rev() {
        suffix[p] = suffix[p + 1] + mag[p];
    }
    let mut search = Search {
        index: &index,
        mag: &mag,
        suffix: &suffix,
        best: mag.iter().map(|m| m * m).sum(),
        best_blocks: (0..l).map(|p| vec![p]).collect(),
        blocks: Vec::new(),
    };
    search.go(0, 0.0, 0.0, 0);
    let blocks = search
        .best_blocks
        .iter()
        .map(|b| b.iter().map(|&p| index[p]).collect())
        .collect();
    Ok(NormResult {
        value: search.best.sqrt(),
        witness: family_of(blocks),
    })
}

struct Search<'a> {
    index: &'a [usize],
    mag: &'a [f64],
    suffix: &'a [f64],
    best: f64,
    best_blocks: Vec<Vec<usize>>,
    blocks: Vec<Vec<usize>>,
}

impl Search<'_> {
    /// `closed`: Σ squares of finished blocks; `cur`: ℓ₁ of the open block;
    /// `room`: elements the open block may still take.
    fn go(&mut self, p: usize, closed: f64, cur: f64, room: usize) {
        if p == self.mag.len() {
            let total = closed + cur * cur;
            if total > self.best {
                self.best = total;
                self.best_blocks = self.blocks.clone();
            }
            return;
        }
        let reach = cur + self.suffix[p];
        if closed + reach * reach <= self.best {
            return;
        }
        if room > 0 && !self.blocks.is_empty() {
            self.blocks.last_mut().expect("open block").push(p);
            self.go(p + 1, closed, cur + self.mag[p], room - 1);
            self.blocks.last_mut().expect("open block").pop();
        }
        self.blocks.push(vec![p]);
        self.go(p + 1, closed + cur * cur, self.mag[p], self.index[p] - 1);
        self.blocks.pop();
        self.go(p + 1, closed, cur, room);
    }
}

#[derive(PartialEq)]
struct Mag(f64);

impl Eq for Mag {}

impl PartialOrd for Mag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Mag {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Positions of the `room` largest magnitudes in `(a, b]` (ties to the left).
fn top_in_window(mag: &[f64], a: usize, b: usize, room: usize) -> Vec<usize> {
    let mut cand: Vec<usize> = (a + 1..=b).collect();
    cand.sort_by(|&p, &q| mag[q].total_cmp(&mag[p]).then(p.cmp(&q)));
    cand.truncate(room);
    cand.sort_unstable();
    cand
}

/// `‖v‖_B` exactly, by the window program. Uncapped.
pub fn b_norm(v: &SparseVec) -> NormResult {
    let l = v.support_len();
    if l == 0 {
        return zero_result();
    }
    let index: Vec<usize> = v.iter().map(|(i, _)| *i).collect();
    let mag: Vec<f64> = v.iter().map(|(_, x)| x.abs()).collect();
    let mut d = vec![0.0; l + 1];
    // (window end, or None when position a is skipped)
    let mut choice: Vec<Option<usize>> = vec![None; l];
    for a in (0..l).rev() {
        let room = index[a] - 1;
        let mut best = d[a + 1];
        let mut pick = None;
        let mut heap: BinaryHeap<Reverse<Mag>> = BinaryHeap::new();
        let mut extra = 0.0;
        for b in a..l {
            if b > a && room > 0 {
                if heap.len() < room {
                    heap.push(Reverse(Mag(mag[b])));
                    extra += mag[b];
                } else if heap.peek().map_or(false, |Reverse(m)| mag[b] > m.0) {
                    let Reverse(Mag(out)) = heap.pop().expect("nonempty");
                    heap.push(Reverse(Mag(mag[b])));
                    extra += mag[b] - out;
                }
            }
            let w = mag[a] + extra;
            let cand = w * w + d[b + 1];
            if cand > best {
                best = cand;
                pick = Some(b);
            }
        }
        d[a] = best;
        choice[a] = pick;
    }
    let mut blocks = Vec::new();
    let mut a = 0;
    while a < l {
        match choice[a] {
            None => a += 1,
            Some(b) => {
                let mut block = vec![index[a]];
                block.extend(top_in_window(&mag, a, b, index[a] - 1).into_iter().map(|p| index[p]));
                blocks.push(block);
                a = b + 1;
            }
        }
    }
    let witness = family_of(blocks);
    NormResult {
        value: witness.evaluate(v),
        witness,
    }
}

/// A value reported as a lower bound only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub label: &'static str,
}

impl LowerBound {
    fn new(value: f64) -> Self {
        Self {
            value,
            label: "LOWER_BOUND",
        }
    }
}

impl fmt::Display for LowerBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.value, self.label)
    }
}

/// Lower bound for `‖v‖_B` using blocks made of consecutive support points.
pub fn b_norm_interval(v: &SparseVec) -> LowerBound {
    let l = v.support_len();
    let index: Vec<usize> = v.iter().map(|(i, _)| *i).collect();
    let mag: Vec<f64> = v.iter().map(|(_, x)| x.abs()).collect();
    let mut d = vec![0.0f64; l + 1];
    for a in (0..l).rev() {
        let mut best = d[a + 1];
        let mut s = 0.0;
        for b in a..l.min(a + index[a]) {
            s += mag[b];
            best = best.max(s * s + d[b + 1]);
        }
        d[a] = best;
    }
    LowerBound::new(d[0].sqrt())
}

/// `‖v‖² ≥ ‖P_n v‖² + ‖(I − P_n) v‖²` within `tol`, with exact norms.
pub fn partlemma_check(v: &SparseVec, n: usize, cap: usize, tol: f64) -> Result<bool> {
    let whole = b_norm_exact(v, cap)?.value;
    let head = b_norm_exact(&v.head_proj(n), cap)?.value;
    let tail = b_norm_exact(&v.tail_proj(n), cap)?.value;
    Ok(whole * whole + tol >= head * head + tail * tail)
}

/// `‖e_n + … + e_{2n−1}‖_B = n`, by the exact engine.
pub fn easy_lemma_check(n: usize, cap: usize) -> Result<f64> {
    if n == 0 {
        return Err(domain("n >= 1 required"));
    }
    Ok(b_norm_exact(&SparseVec::indicator(n..=2 * n - 1), cap)?.value)
}

/// `√(1 − (ε/2)²)`.
pub fn b_ball_radius(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(domain(format!("ε must lie in (0,2), got {eps}")));
    }
    Ok((1.0 - (eps / 2.0).powi(2)).sqrt())
}

/// The `δ` with `r(δ)² = (‖x₀‖² + r(ε)²)/2`, halfway between the two constraints.
pub fn auto_delta(x0_norm: f64, eps: f64) -> Result<f64> {
    let r = b_ball_radius(eps)?;
    Ok(2.0 * (1.0 - 0.5 * (x0_norm * x0_norm + r * r)).sqrt())
}

/// Options of [`b_membership_witness`].
#[derive(Clone, Debug)]
pub struct WitnessOptions {
    /// `None` picks [`auto_delta`].
    pub delta: Option<f64>,
    /// `0` picks the first `n > N` allowed by the bound `θ + δN²/n ≤ 1`.
    pub n_start: usize,
    pub pairs: usize,
    pub max_support: usize,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        Self {
            delta: None,
            n_start: 0,
            pairs: 2,
            max_support: DEFAULT_MAX_SUPPORT,
        }
    }
}

/// Membership certificate for `x₀ ∈ s_ε B` from the pairs
/// `x_{n,±} = x₀ ± (δ/2n)(e_n + … + e_{2n−1})`.
pub fn b_membership_witness(x0: &SparseVec, eps: f64, opts: &WitnessOptions) -> Result<DerivationCertificate> {
    let r_eps = b_ball_radius(eps)?;
    let x0_norm = b_norm(x0).value;
    if x0_norm >= r_eps {
        return Err(precondition(format!(
            "‖x0‖_B < √(1−(ε/2)²) fails ({x0_norm} >= {r_eps})"
        )));
    }
    let delta = match opts.delta {
        Some(d) => d,
        None => auto_delta(x0_norm, eps)?,
    };
    if !(delta > eps && delta < 2.0) {
        return Err(precondition(format!("δ ∈ (ε,2) fails (δ = {delta})")));
    }
    let r_delta = b_ball_radius(delta)?;
    if x0_norm >= r_delta {
        return Err(precondition(format!(
            "‖x0‖_B < √(1−(δ/2)²) fails ({x0_norm} >= {r_delta})"
        )));
    }
    let big_n = x0.max_support().unwrap_or(0);
    if opts.n_start != 0 && opts.n_start <= big_n {
        return Err(precondition(format!("nStart > N fails ({} <= {big_n})", opts.n_start)));
    }
    let theta = x0_norm * x0_norm + delta * delta / 4.0;
    let prefilter = |n: usize| theta + delta * (big_n * big_n) as f64 / n as f64 <= 1.0;
    let n0 = if opts.n_start == 0 {
        let guess = (delta * (big_n * big_n) as f64 / (1.0 - theta)).ceil() as usize;
        let mut n = guess.max(big_n + 1).max(1);
        while !prefilter(n) {
            n += 1;
        }
        n
    } else {
        opts.n_start
    };
    let pairs = opts.pairs.max(1);
    let widest = 2 * (n0 + pairs - 1) - 1;
    if widest - n0 + 1 + x0.support_len() > opts.max_support {
        return Err(precondition(format!(
            "support budget: block of length {} needed, at most {} allowed",
            widest - n0 + 1,
            opts.max_support
        )));
    }
    let mut list = Vec::with_capacity(pairs);
    for n in n0..n0 + pairs {
        let block = SparseVec::indicator(n..=2 * n - 1).scale(&(delta / (2 * n) as f64));
        let (plus, minus) = (x0.add(&block), x0.sub(&block));
        let worst = b_norm(&plus).value.max(b_norm(&minus).value);
        if worst > 1.0 + crate::vecspace::DEFAULT_TOL {
            return Err(Error::CheckFailed(format!(
                "‖x_(n,±)‖_B = {worst} > 1 at n = {n}"
            )));
        }
        list.push(PerturbationPair { plus, minus });
    }
    Ok(DerivationCertificate {
        point: x0.clone(),
        eps,
        pairs: list,
        space: Space::Baernstein,
        coord_horizon: n0,
        construction: format!("baernstein x_(n,±), δ={delta:.6}, n from {n0}"),
    })
}

/// One row of [`mstar_failure_demo`].
#[derive(Clone, Debug, Serialize)]
pub struct MStarRow {
    pub n: usize,
    pub first: f64,
    pub second: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MStarReport {
    pub rows: Vec<MStarRow>,
    pub first_expected: f64,
    pub second_expected: f64,
    pub max_error: f64,
    pub verdict: String,
}

/// `‖e₁ + e_n‖_B` against `‖(e₁+e₂)/√2 + e_n‖_B` for `n = 3..=10`: equal norms
/// `‖x₀‖ = ‖y₀‖ = 1` with a common weak*-null perturbation and different
/// limits.
pub fn mstar_failure_demo() -> Result<MStarReport> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let first_expected = 2f64.sqrt();
    let second_expected = (2.0 + 2f64.sqrt()).sqrt();
    let mut rows = Vec::new();
    let mut max_error = 0f64;
    for n in 3..=10 {
        let first = b_norm_exact(&SparseVec::from_pairs([(1, 1.0), (n, 1.0)])?, DEFAULT_EXACT_CAP)?.value;
        let second = b_norm_exact(&SparseVec::from_pairs([(1, s), (2, s), (n, 1.0)])?, DEFAULT_EXACT_CAP)?.value;
        max_error = max_error
            .max((first - first_expected).abs())
            .max((second - second_expected).abs());
        rows.push(MStarRow { n, first, second });
    }
    let distinct = rows.iter().all(|r| (r.second - r.first).abs() > 1e-6);
    let verdict = if distinct && max_error < 1e-12 {
        "property (M*) falsified"
    } else {
        "inconclusive"
    };
    Ok(MStarReport {
        rows,
        first_expected,
        second_expected,
        max_error,
        verdict: verdict.to_string(),
    })
}

/// A vector where consecutive-run blocks fall strictly short of the norm.
#[derive(Clone, Debug, Serialize)]
pub struct GapInstance {
    pub vector: SparseVec,
    pub exact: f64,
    pub interval: f64,
}

/// Random vectors with at most `max_support` points in `1..=horizon`,
/// keeping those where [`b_norm_interval`] is strictly below the exact norm.
/// Also returns the number of instances where the lower bound was violated.
pub fn interval_gap_survey(samples: usize, horizon: usize, max_support: usize, seed: u64) -> Result<(Vec<GapInstance>, usize)> {
    let mut gaps = Vec::new();
    let mut violations = 0;
    for k in 0..samples {
        let mut rng = sample_rng(seed, 0xb9a9, k as u32);
        let scale = rng.gen_range(0.1..10.0);
        let v = random_sparse(&mut rng, 1, horizon, max_support.min(DEFAULT_EXACT_CAP), scale);
        let exact = b_norm_exact(&v, DEFAULT_EXACT_CAP)?.value;
        let interval = b_norm_interval(&v).value;
        if interval > exact * (1.0 + 1e-12) {
            violations += 1;
        } else if interval < exact * (1.0 - 1e-12) {
            gaps.push(GapInstance { vector: v, exact, interval });
        }
    }
    Ok((gaps, violations))
}

/// `√(1 − (ε/2)²)` agrees with the `m_q` formula at `q = 2`.
pub fn radius_matches_mq(eps: f64) -> Result<f64> {
    Ok((b_ball_radius(eps)? - mq_radius(eps, 2.0)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(pairs: &[(usize, f64)]) -> SparseVec {
        SparseVec::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn exact_examples() {
        let cap = DEFAULT_EXACT_CAP;
        assert_eq!(b_norm_exact(&SparseVec::indicator(4..=7), cap).unwrap().value, 4.0);
        assert_eq!(b_norm_exact(&SparseVec::indicator(1..=2), cap).unwrap().value, 2f64.sqrt());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let y = b_norm_exact(&v(&[(1, s), (2, s), (4, 1.0)]), cap).unwrap().value;
        assert!((y - (2.0 + 2f64.sqrt()).sqrt()).abs() < 1e-12);
        let r = b_norm_exact(&SparseVec::indicator(1..=3), cap).unwrap();
        assert_eq!(r.value, 5f64.sqrt());
        assert!(r.witness_is_sound(&SparseVec::indicator(1..=3), 1e-12));
        assert!(matches!(
            b_norm_exact(&SparseVec::indicator(1..=15), cap),
            Err(Error::CapExceeded { cap: 14, support: 15 })
        ));
    }

    #[test]
    fn window_program_matches_branch_and_bound() {
        for k in 0..300u32 {
            let mut rng = sample_rng(11, 1, k);
            let x = random_sparse(&mut rng, 1, 20, 12, 3.0);
            let exact = b_norm_exact(&x, DEFAULT_EXACT_CAP).unwrap().value;
            let fast = b_norm(&x);
            assert!((exact - fast.value).abs() <= 1e-12 * exact.max(1.0), "{x:?}");
            assert!(fast.witness_is_sound(&x, 1e-12));
        }
    }

    #[test]
    fn interval_is_a_lower_bound_with_a_strict_gap() {
        assert_eq!(b_norm_interval(&SparseVec::indicator(1..=2)).value, 2f64.sqrt());
        assert_eq!(b_norm_interval(&SparseVec::indicator(4..=7)).value, 4.0);
        let x = v(&[(2, 1.0), (3, 0.1), (4, 1.0)]);
        let exact = b_norm_exact(&x, DEFAULT_EXACT_CAP).unwrap().value;
        assert_eq!(exact, 2.0);
        assert!(b_norm_interval(&x).value < exact);
        assert_eq!(b_norm_interval(&x).label, "LOWER_BOUND");
    }

    #[test]
    fn lemma_checks() {
        assert!(partlemma_check(&SparseVec::indicator(1..=2), 1, 14, 1e-12).unwrap());
        assert!(partlemma_check(&v(&[(3, 2.0), (5, -1.0)]), 0, 14, 1e-12).unwrap());
        for n in 1..=6 {
            assert_eq!(easy_lemma_check(n, 14).unwrap(), n as f64);
        }
    }

    #[test]
    fn radius_values() {
        assert!((b_ball_radius(1.0).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((b_ball_radius(2f64.sqrt()).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(b_ball_radius(1.999999).unwrap() < 1e-2);
        assert!(b_ball_radius(0.0).is_err());
    }

    #[test]
    fn witnesses() {
        let opts = WitnessOptions {
            delta: Some(1.2),
            ..Default::default()
        };
        let cert = b_membership_witness(&v(&[(1, 0.5)]), 1.0, &opts).unwrap();
        assert!(crate::szlenk::validate_certificate(&cert).unwrap());
        let opts = WitnessOptions {
            delta: Some(1.8),
            ..Default::default()
        };
        let cert = b_membership_witness(&SparseVec::zero(), 1.5, &opts).unwrap();
        assert!(crate::szlenk::validate_certificate(&cert).unwrap());
        assert!(matches!(
            b_membership_witness(&v(&[(1, 0.9)]), 1.0, &WitnessOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn mstar_demo() {
        let rep = mstar_failure_demo().unwrap();
        assert_eq!(rep.verdict, "property (M*) falsified");
        assert_eq!(rep.rows.len(), 8);
    }
}
