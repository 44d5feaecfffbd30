//! Seeded random streams and the neighborhood samplers used by the
//! sampled checks.
//!
//! Every random quantity flows from one root seed. A check asks for stream
//! `id`; sample `k` of that check then uses the ChaCha stream
//! `(id << 32) | k`, so results do not depend on how samples are scheduled
//! across worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use serde::Serialize;

use crate::vecspace::{Rational, SparseVec};

/// Outcome of a sampled tail-norm estimate.
#[derive(Clone, Debug, Serialize)]
pub struct TailBoundReport {
    pub samples: usize,
    pub rejected: usize,
    pub bound: f64,
    pub worst_tail: f64,
    pub violations: usize,
    pub passed: bool,
}

impl TailBoundReport {
    /// Summarizes measured tail norms (`None` for rejected draws) against `bound`.
    pub fn from_tails(outcomes: &[Option<f64>], bound: f64) -> Self {
        let tails: Vec<f64> = outcomes.iter().flatten().copied().collect();
        let violations = tails.iter().filter(|t| **t > bound + 1e-12).count();
        Self {
            samples: tails.len(),
            rejected: outcomes.len() - tails.len(),
            bound,
            worst_tail: tails.iter().copied().fold(0.0, f64::max),
            violations,
            passed: violations == 0 && !tails.is_empty(),
        }
    }
}

/// Independent generator for `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for sample `sample` of check `check`.
pub fn sample_rng(seed: u64, check: u32, sample: u32) -> ChaCha8Rng {
    stream_rng(seed, (u64::from(check) << 32) | u64::from(sample))
}

/// Random vector supported in `first..=last` with at most `max_support`
/// nonzero coordinates, magnitudes up to `scale` and random signs.
pub fn random_sparse<R: Rng>(
    rng: &mut R,
    first: usize,
    last: usize,
    max_support: usize,
    scale: f64,
) -> SparseVec {
    assert!(first >= 1 && first <= last);
    let width = last - first + 1;
    let size = rng.gen_range(1..=max_support.min(width).max(1));
    let mut picked: Vec<usize> = rand::seq::index::sample(rng, width, size)
        .into_iter()
        .map(|k| first + k)
        .collect();
    picked.sort_unstable();
    let pairs: Vec<(usize, f64)> = picked
        .into_iter()
        .map(|i| {
            let mag = scale * rng.gen_range(0.05..=1.0);
            (i, if rng.gen_bool(0.5) { mag } else { -mag })
        })
        .collect();
    SparseVec::from_pairs(pairs).expect("indices distinct and values finite")
}

/// Random rational vector with at most `max_support` nonzero coordinates in
/// `1..=horizon`, numerators in `±1..=9` and denominators in `1..=8`.
pub fn random_rational<R: Rng>(rng: &mut R, horizon: usize, max_support: usize) -> SparseVec<Rational> {
    let size = rng.gen_range(1..=max_support.min(horizon).max(1));
    let picked = rand::seq::index::sample(rng, horizon, size);
    let triples: Vec<(usize, i64, i64)> = picked
        .into_iter()
        .map(|k| {
            let num = rng.gen_range(1..=9i64) * if rng.gen_bool(0.5) { 1 } else { -1 };
            (k + 1, num, rng.gen_range(1..=8i64))
        })
        .collect();
    SparseVec::from_ratios(triples).expect("distinct indices, nonzero denominators")
}

/// Largest `c ∈ [0, c_max]` (to relative precision ~1e-12) with
/// `norm(base + c·dir) <= limit`, assuming `norm(base) <= limit`.
///
/// The map `c ↦ norm(base + c·dir)` is convex, so the feasible set is an interval.
pub fn largest_feasible_scale(
    norm: impl Fn(&SparseVec) -> f64,
    base: &SparseVec,
    dir: &SparseVec,
    limit: f64,
    c_max: f64,
) -> f64 {
    let at = |c: f64| norm(&base.add(&dir.scale(&c)));
    if at(c_max) <= limit {
        return c_max;
    }
    let (mut lo, mut hi) = (0.0f64, c_max);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if at(mid) <= limit {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.max(1e-300) {
            break;
        }
    }
    lo
}

/// A vector in the weak*-neighborhood `{y : |y_i − center_i| < δ, i ≤ horizon}`
/// of the unit ball, pushed toward the sphere along a random tail direction.
///
/// Returns `None` when the perturbed head already leaves the unit ball.
pub fn sample_ball_neighbor<R: Rng>(
    rng: &mut R,
    norm: &dyn Fn(&SparseVec) -> f64,
    center: &SparseVec,
    horizon: usize,
    delta: f64,
    tail_width: usize,
) -> Option<SparseVec> {
    let head_pairs: Vec<(usize, f64)> = (1..=horizon)
        .map(|i| {
            // strictly inside (−δ, δ)
            let shift = delta * (1.0 - 1e-9) * rng.gen_range(-1.0..=1.0);
            (i, center.get(i) + shift)
        })
        .collect();
    let head = SparseVec::from_pairs(head_pairs).expect("finite");
    if norm(&head) > 1.0 {
        return None;
    }
    let max_tail = rng.gen_range(1..=tail_width.max(1));
    let dir = random_sparse(rng, horizon + 1, horizon + tail_width.max(1), max_tail, 1.0);
    let c = largest_feasible_scale(norm, &head, &dir, 1.0, 1e3);
    // mostly on the sphere, sometimes strictly inside
    let shrink = if rng.gen_bool(0.75) {
        1.0
    } else {
        rng.gen_range(0.0..1.0)
    };
    Some(head.add(&dir.scale(&(c * shrink))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = sample_rng(7, 1, 2).gen();
        let b: u64 = sample_rng(7, 1, 2).gen();
        let c: u64 = sample_rng(7, 1, 3).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn feasible_scale_hits_the_boundary() {
        let base = SparseVec::unit(1).scale(&0.5);
        let dir = SparseVec::unit(2);
        let c = largest_feasible_scale(|v| v.max_abs(), &base, &dir, 1.0, 10.0);
        assert!((c - 1.0).abs() < 1e-10);
    }
}
