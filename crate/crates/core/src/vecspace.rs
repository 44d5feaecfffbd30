//! Finitely supported sequences, classical `ℓ_p` norms, coordinate
//! projections and the admissibility predicates shared by the norm engines.
//!
//! Indices are 1-based. A [`SparseVec`] stores only its nonzero
//! coordinates, in strictly increasing index order; the zero vector has no
//! entries.

use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{domain, Error, Result};

/// Default absolute tolerance for engine-vs-oracle comparisons in float mode.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Exact rational coordinates.
pub type Rational = BigRational;

/// Coordinate field used by the norm engines: `f64` or [`Rational`].
pub trait Scalar:
    Signed + PartialOrd + Clone + fmt::Debug + FromPrimitive + ToPrimitive + Send + Sync
{
    fn half(&self) -> Self {
        self.clone() / (Self::one() + Self::one())
    }

    /// Larger of two values; `NaN` never wins.
    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Signed + PartialOrd + Clone + fmt::Debug + FromPrimitive + ToPrimitive + Send + Sync
{
}

/// `|a - b| <= tol`.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// A finitely supported real sequence indexed by positive integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseVec<S = f64> {
    entries: Vec<(usize, S)>,
}

impl<S: Scalar> SparseVec<S> {
    pub fn zero() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Builds a vector from `(index, value)` pairs in any order.
    ///
    /// Zero values are dropped. Index `0`, repeated indices and non-finite
    /// values are rejected.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, S)>) -> Result<Self> {
        let mut entries: Vec<(usize, S)> = pairs.into_iter().collect();
        entries.sort_by_key(|(i, _)| *i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidVector(format!("index {} repeated", w[0].0)));
            }
        }
        if let Some((i, _)) = entries.first() {
            if *i == 0 {
                return Err(Error::InvalidVector("indices are 1-based".into()));
            }
        }
        if let Some((i, v)) = entries.iter().find(|(_, v)| !v.approx_f64().is_finite()) {
            return Err(Error::InvalidVector(format!(
                "coordinate {i} is not finite: {v:?}"
            )));
        }
        entries.retain(|(_, v)| !v.is_zero());
        Ok(Self { entries })
    }

    /// The unit vector `e_index`.
    pub fn unit(index: usize) -> Self {
        assert!(index >= 1, "indices are 1-based");
        Self {
            entries: vec![(index, S::one())],
        }
    }

    /// `Σ_{i ∈ range} e_i`.
    pub fn indicator(range: RangeInclusive<usize>) -> Self {
        assert!(*range.start() >= 1, "indices are 1-based");
        Self {
            entries: range.map(|i| (i, S::one())).collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, S)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = &(usize, S)> + '_ {
        self.entries.iter()
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().map(|(i, _)| *i).collect()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_support(&self) -> Option<usize> {
        self.entries.first().map(|(i, _)| *i)
    }

    pub fn max_support(&self) -> Option<usize> {
        self.entries.last().map(|(i, _)| *i)
    }

    /// Coordinate `index`, zero when outside the support.
    pub fn get(&self, index: usize) -> S {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1.clone(),
            Err(_) => S::zero(),
        }
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            entries: self
                .entries
                .iter()
                .map(|(i, v)| (*i, v.clone() * c.clone()))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    fn merge(&self, other: &Self, sign: S) -> Self {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (None, None) => break,
                (Some(_), None) => a.next().cloned(),
                (None, Some((j, w))) => {
                    b.next();
                    Some((*j, w.clone() * sign.clone()))
                }
                (Some((i, v)), Some((j, w))) => {
                    if i < j {
                        a.next().cloned()
                    } else if j < i {
                        b.next();
                        Some((*j, w.clone() * sign.clone()))
                    } else {
                        let s = v.clone() + w.clone() * sign.clone();
                        let idx = *i;
                        a.next();
                        b.next();
                        Some((idx, s))
                    }
                }
            };
            if let Some((i, v)) = next {
                if !v.is_zero() {
                    out.push((i, v));
                }
            }
        }
        Self { entries: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.merge(other, S::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.merge(other, -S::one())
    }

    /// Coordinatewise absolute value.
    pub fn abs(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|(i, v)| (*i, v.abs())).collect(),
        }
    }

    /// Keeps exactly the coordinates whose index lies in `set`.
    pub fn restrict(&self, set: &IndexSet) -> Self {
        self.restrict_by(|i| set.contains(i))
    }

    pub fn restrict_by(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| keep(*i))
                .cloned()
                .collect(),
        }
    }

    /// `P_n v`: coordinates with index `<= n`.
    pub fn head_proj(&self, n: usize) -> Self {
        self.restrict_by(|i| i <= n)
    }

    /// `(I - P_n) v`: coordinates with index `> n`.
    pub fn tail_proj(&self, n: usize) -> Self {
        self.restrict_by(|i| i > n)
    }

    /// Moves the support to new indices, keeping values and their order.
    /// `new_indices` must be strictly increasing and as long as the support.
    pub fn respread(&self, new_indices: &[usize]) -> Result<Self> {
        if new_indices.len() != self.entries.len() {
            return Err(domain("respread needs one index per support point"));
        }
        Self::from_pairs(
            new_indices
                .iter()
                .zip(&self.entries)
                .map(|(i, (_, v))| (*i, v.clone())),
        )
    }

    pub fn max_abs(&self) -> S {
        self.entries
            .iter()
            .map(|(_, v)| v.abs())
            .fold(S::zero(), S::max_of)
    }

    pub fn l1(&self) -> S {
        self.entries
            .iter()
            .fold(S::zero(), |acc, (_, v)| acc + v.abs())
    }

    pub fn to_f64(&self) -> SparseVec<f64> {
        SparseVec {
            entries: self
                .entries
                .iter()
                .map(|(i, v)| (*i, v.approx_f64()))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        }
    }
}

impl SparseVec<f64> {
    /// Builds `Σ values[k] e_{k+1}` from a dense prefix.
    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::from_pairs(values.iter().enumerate().map(|(k, v)| (k + 1, *v)))
    }

    /// Exact rational copy (every finite double is a dyadic rational).
    pub fn to_rational(&self) -> SparseVec<Rational> {
        SparseVec {
            entries: self
                .entries
                .iter()
                .map(|(i, v)| (*i, Rational::from_float(*v).expect("finite by invariant")))
                .collect(),
        }
    }

    /// `‖v‖_p` for `p ∈ [1, ∞]`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    pub fn l2(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }
}

impl SparseVec<Rational> {
    pub fn from_ratios(pairs: impl IntoIterator<Item = (usize, i64, i64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (i, num, den) in pairs {
            if den == 0 {
                return Err(Error::InvalidVector(format!("zero denominator at {i}")));
            }
            out.push((i, Rational::new(BigInt::from(num), BigInt::from(den))));
        }
        Self::from_pairs(out)
    }
}

impl<S: Scalar> Default for SparseVec<S> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<S: fmt::Debug> fmt::Debug for SparseVec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (k, (i, v)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{v:?}·e{i}")?;
        }
        Ok(())
    }
}

impl Serialize for SparseVec<f64> {
    fn serialize<Z: Serializer>(&self, serializer: Z) -> std::result::Result<Z::Ok, Z::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SparseVec<f64> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<(usize, f64)>::deserialize(deserializer)?;
        SparseVec::from_pairs(pairs).map_err(serde::de::Error::custom)
    }
}

/// Parses the JSON interchange format: an array of `[index, value]` pairs.
pub fn parse_vec_json(text: &str) -> Result<SparseVec> {
    Ok(serde_json::from_str(text)?)
}

/// `‖v‖_p` of a finitely supported sequence; `p = f64::INFINITY` gives the sup norm.
pub fn lp_norm(v: &SparseVec<f64>, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(domain(format!("lp_norm needs p >= 1, got {p}")));
    }
    if v.is_zero() {
        return Ok(0.0);
    }
    if p.is_infinite() {
        return Ok(v.max_abs());
    }
    if p == 1.0 {
        return Ok(v.l1());
    }
    // Scale by the sup norm so large p does not overflow.
    let m = v.max_abs();
    let s: f64 = v.iter().map(|(_, x)| (x.abs() / m).powf(p)).sum();
    Ok(m * s.powf(1.0 / p))
}

/// A nonempty, sorted, duplicate-free finite set of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(domain("index sets are nonempty"));
        }
        if v[0] == 0 {
            return Err(domain("indices are 1-based"));
        }
        Ok(Self(v))
    }

    /// `{a, a+1, …, b}`.
    pub fn interval(a: usize, b: usize) -> Result<Self> {
        Self::new(a..=b)
    }

    pub fn min(&self) -> usize {
        self.0[0]
    }

    pub fn max(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }
}

impl TryFrom<Vec<usize>> for IndexSet {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(&self.0).finish()
    }
}

/// Which admissibility rule a block family obeys.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// `k ≤ E₁ < … < E_k`: at most `min E₁` blocks.
    Tsirelson,
    /// Any successive family.
    Schlumprecht,
    /// `|E_i| ≤ min E_i` for every block.
    Baernstein,
}

/// An ordered family `E₁ < … < E_k` of finite index sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockFamily {
    pub kind: FamilyKind,
    pub blocks: Vec<IndexSet>,
}

impl BlockFamily {
    pub fn new(kind: FamilyKind, blocks: Vec<IndexSet>) -> Self {
        Self { kind, blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn is_successive(&self) -> bool {
        self.blocks.windows(2).all(|w| w[0].max() < w[1].min())
    }

    pub fn is_admissible(&self) -> bool {
        is_admissible(self)
    }
}

/// True iff `fam` is successively ordered and satisfies the rule of its kind.
pub fn is_admissible(fam: &BlockFamily) -> bool {
    if !fam.is_successive() {
        return false;
    }
    match fam.kind {
        FamilyKind::Tsirelson => fam
            .blocks
            .first()
            .map_or(true, |first| fam.blocks.len() <= first.min()),
        FamilyKind::Schlumprecht => true,
        FamilyKind::Baernstein => fam.blocks.iter().all(|b| b.len() <= b.min()),
    }
}
