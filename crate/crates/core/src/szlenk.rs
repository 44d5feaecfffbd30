//! Space-agnostic pieces of the Szlenk derivation analysis: membership
//! certificates, the radial scaling construction, closed-form radii and
//! radius curves.
//!
//! A [`DerivationCertificate`] is finite-resolution evidence that a point
//! lies in `s_ε B`: perturbation pairs inside the unit ball, each pair more
//! than `ε` apart, whose deviation from the point on the first
//! `coord_horizon` coordinates shrinks along the list. Weak*-convergence is
//! only represented through that horizon, so a certificate is a proxy and
//! not a proof.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baernstein::{self, b_ball_radius, b_norm, b_membership_witness};
use crate::error::{domain, precondition, Error, Result};
use crate::orlicz::{self, closed_form_norm, OrliczParams};
use crate::sampling::largest_feasible_scale;
use crate::schlumprecht::{self, s_membership_witness, s_norm, s_r_upper_bound, s_R_curve};
use crate::tsirelson::{t_membership_witness, t_norm};
use crate::vecspace::{SparseVec, DEFAULT_TOL};

/// The four sequence spaces. Certificates live in the space whose unit ball
/// is being derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Space {
    Tsirelson,
    Schlumprecht,
    Baernstein,
    Orlicz(OrliczParams),
}

impl Space {
    /// Norm of `v` in this space.
    pub fn norm(&self, v: &SparseVec) -> f64 {
        match self {
            Space::Tsirelson => t_norm(v).value,
            Space::Schlumprecht => s_norm(v).value,
            Space::Baernstein => b_norm(v).value,
            Space::Orlicz(p) => closed_form_norm(v, p),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Space::Tsirelson => "tsirelson",
            Space::Schlumprecht => "schlumprecht",
            Space::Baernstein => "baernstein",
            Space::Orlicz(_) => "orlicz",
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Orlicz(p) => write!(f, "orlicz(A={}, B={})", p.a, p.b),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    /// `orlicz` parses to `A = B = 1`.
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsirelson" => Ok(Space::Tsirelson),
            "schlumprecht" => Ok(Space::Schlumprecht),
            "baernstein" => Ok(Space::Baernstein),
            "orlicz" => Ok(Space::Orlicz(OrliczParams { a: 1.0, b: 1.0 })),
            _ => Err(Error::UnknownSpace(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPair {
    pub plus: SparseVec,
    pub minus: SparseVec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivationCertificate {
    pub point: SparseVec,
    pub eps: f64,
    pub pairs: Vec<PerturbationPair>,
    pub space: Space,
    pub coord_horizon: usize,
    /// How the pairs were built.
    #[serde(default)]
    pub construction: String,
}

/// Measured quantities of one pair.
#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub gap: f64,
}

/// Everything [`validate_certificate`] looks at.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub pairs: Vec<PairCheck>,
    pub norms_ok: bool,
    pub gaps_ok: bool,
    pub convergence_ok: bool,
    pub valid: bool,
}

/// Largest deviation from `point` of the two members of `pair`, per coordinate
/// up to `horizon`.
fn deviation(point: &SparseVec, pair: &PerturbationPair, horizon: usize) -> SparseVec {
    let a = pair.plus.sub(point).head_proj(horizon).abs();
    let b = pair.minus.sub(point).head_proj(horizon).abs();
    let idx: std::collections::BTreeSet<usize> = a.support().into_iter().chain(b.support()).collect();
    SparseVec::from_pairs(idx.into_iter().map(|j| (j, a.get(j).max(b.get(j))))).expect("finite")
}

/// Re-evaluates every certificate invariant with the space's norm engine.
pub fn certificate_report(cert: &DerivationCertificate, tol: f64) -> Result<CertificateReport> {
    if cert.pairs.is_empty() {
        return Err(precondition("certificate has no perturbation pairs"));
    }
    let checks: Vec<PairCheck> = cert
        .pairs
        .par_iter()
        .map(|p| PairCheck {
            norm_plus: cert.space.norm(&p.plus),
            norm_minus: cert.space.norm(&p.minus),
            gap: cert.space.norm(&p.plus.sub(&p.minus)),
        })
        .collect();
    let norms_ok = checks
        .iter()
        .all(|c| c.norm_plus <= 1.0 + tol && c.norm_minus <= 1.0 + tol);
    let gaps_ok = checks.iter().all(|c| c.gap > cert.eps);
    let devs: Vec<SparseVec> = cert
        .pairs
        .iter()
        .map(|p| deviation(&cert.point, p, cert.coord_horizon))
        .collect();
    let monotone = devs
        .windows(2)
        .all(|w| w[1].iter().all(|(j, d)| *d <= w[0].get(*j) + tol));
    let vanishing = devs.len() < 2 || devs.last().map_or(true, |d| d.max_abs() <= tol);
    let convergence_ok = cert.coord_horizon >= 1 && monotone && vanishing;
    Ok(CertificateReport {
        pairs: checks,
        norms_ok,
        gaps_ok,
        convergence_ok,
        valid: norms_ok && gaps_ok && convergence_ok,
    })
}

/// True iff every certificate invariant holds (tolerance [`DEFAULT_TOL`]).
pub fn validate_certificate(cert: &DerivationCertificate) -> Result<bool> {
    Ok(certificate_report(cert, DEFAULT_TOL)?.valid)
}

/// Certificate for `θ·point` from one for `point`: each pair `(u, v)` becomes
/// `a = (1+θ)/2·u − (1−θ)/2·v`, `b = (1+θ)/2·v − (1−θ)/2·u`, so `a − b = u − v`
/// and `‖a‖, ‖b‖ ≤ 1`.
pub fn radial_scale(cert: &DerivationCertificate, theta: f64) -> Result<DerivationCertificate> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(domain(format!("θ must lie in (0,1), got {theta}")));
    }
    if !validate_certificate(cert)? {
        return Err(precondition("input certificate does not validate"));
    }
    let (p, q) = ((1.0 + theta) / 2.0, (1.0 - theta) / 2.0);
    let pairs = cert
        .pairs
        .iter()
        .map(|pair| PerturbationPair {
            plus: pair.plus.scale(&p).sub(&pair.minus.scale(&q)),
            minus: pair.minus.scale(&p).sub(&pair.plus.scale(&q)),
        })
        .collect();
    Ok(DerivationCertificate {
        point: cert.point.scale(&theta),
        eps: cert.eps,
        pairs,
        space: cert.space,
        coord_horizon: cert.coord_horizon,
        construction: format!("{}; radial θ={theta}", cert.construction),
    })
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 2.0 {
        Ok(())
    } else {
        Err(domain(format!("ε must lie in (0,2), got {eps}")))
    }
}

/// `(1 − (ε/2)^q)^{1/q}`.
pub fn mq_radius(eps: f64, q: f64) -> Result<f64> {
    check_eps(eps)?;
    if !(q >= 1.0) {
        return Err(domain(format!("q must be at least 1, got {q}")));
    }
    Ok((1.0 - (eps / 2.0).powf(q)).powf(1.0 / q))
}

/// `1 − ε/2`, valid in every space.
pub fn universal_lower_bound(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(1.0 - eps / 2.0)
}

/// `(r, R) = (1 − ε/4, 1)` for Tsirelson's space.
pub fn tsirelson_radii(eps: f64) -> Result<(f64, f64)> {
    check_eps(eps)?;
    Ok((1.0 - eps / 4.0, 1.0))
}

/// Certificate from the pairs `x₀ ± c·e_k` for `k` beyond the support, with
/// `c` the largest step keeping both norms at most 1. Works in any space
/// whose unit vectors are spreading-invariant, and needs `2c‖e_k‖ > ε`.
pub fn spike_witness(space: Space, x0: &SparseVec, eps: f64, pairs: usize) -> Result<DerivationCertificate> {
    check_eps(eps)?;
    let x0_norm = space.norm(x0);
    if x0_norm > 1.0 {
        return Err(precondition(format!("‖x0‖ <= 1 fails ({x0_norm})")));
    }
    let k0 = x0.max_support().unwrap_or(0) + 1;
    let unit = SparseVec::unit(k0);
    let norm = |v: &SparseVec| space.norm(v);
    let c_cap = 2.0 / space.norm(&unit);
    let c_plus = largest_feasible_scale(norm, x0, &unit, 1.0, c_cap);
    let c_minus = largest_feasible_scale(norm, x0, &unit.scale(&-1.0), 1.0, c_cap);
    let c = c_plus.min(c_minus) * (1.0 - 1e-9);
    let gap = 2.0 * c * space.norm(&unit);
    if gap <= eps {
        return Err(precondition(format!(
            "‖x0 ± c e_k‖ <= 1 with 2c‖e_k‖ > ε fails (best gap {gap} <= {eps})"
        )));
    }
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
        space,
        coord_horizon: k0,
        construction: format!("spike x0 ± c e_k, c={c:.6}, k from {k0}"),
    })
}

/// Knobs of [`certify`].
#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub pairs: usize,
    /// Largest support of a perturbed vector in the combinatorial spaces.
    pub max_support: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            pairs: 2,
            max_support: 200,
        }
    }
}

/// Builds a membership certificate for `x0 ∈ s_ε B` with the construction
/// native to `space`.
pub fn certify(space: Space, x0: &SparseVec, eps: f64, opts: &CertifyOptions) -> Result<DerivationCertificate> {
    match space {
        Space::Tsirelson => t_membership_witness(x0, eps, opts.pairs, opts.max_support),
        Space::Schlumprecht => s_membership_witness(x0, eps, opts.pairs),
        Space::Baernstein => b_membership_witness(
            x0,
            eps,
            &baernstein::WitnessOptions {
                pairs: opts.pairs,
                max_support: opts.max_support,
                ..Default::default()
            },
        ),
        Space::Orlicz(_) => spike_witness(space, x0, eps, opts.pairs),
    }
}

/// One row of a radius curve.
#[derive(Clone, Debug, Serialize)]
pub struct CurveSample {
    pub eps: f64,
    pub r_lower: f64,
    pub r_upper: f64,
    pub big_r_lower: f64,
    pub big_r_upper: f64,
    /// Largest `‖x₀‖` along `e₁` with a validated membership certificate.
    pub certified_radius: Option<f64>,
    /// The certificate search stopped on its budget.
    pub partial: bool,
    pub provenance: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusCurve {
    pub space: Space,
    pub samples: Vec<CurveSample>,
}

impl RadiusCurve {
    /// Violations of `r_lower ≤ r_upper ≤ R_upper`, `R_lower ≤ R_upper`,
    /// `1 − ε/2 ≤ r_upper` and `certified ≤ R_upper`.
    pub fn invariant_violations(&self) -> Vec<String> {
        let tol = 1e-12;
        let mut out = Vec::new();
        for s in &self.samples {
            let checks = [
                (s.r_lower <= s.r_upper + tol, "rLower <= rUpper"),
                (s.big_r_lower <= s.big_r_upper + tol, "RLower <= RUpper"),
                (s.r_upper <= s.big_r_upper + tol, "rUpper <= RUpper"),
                (1.0 - s.eps / 2.0 <= s.r_upper + tol, "1 - eps/2 <= rUpper"),
                (1.0 - s.eps / 2.0 <= s.r_lower + tol, "1 - eps/2 <= rLower"),
                (
                    s.certified_radius.map_or(true, |c| c <= s.big_r_upper + tol),
                    "certified <= RUpper",
                ),
            ];
            for (ok, what) in checks {
                if !ok {
                    out.push(format!("eps={}: {what}", s.eps));
                }
            }
        }
        out
    }
}

/// Limits on the certificate search of [`build_curve`].
#[derive(Clone, Debug)]
pub struct CurveBudget {
    /// Certificate constructions per sample; the bisection wants 20.
    pub constructions: usize,
    pub pairs: usize,
    /// Support limit for the combinatorial spaces; `None` picks a per-space default.
    pub max_support: Option<usize>,
}

/// Bisection steps of the certified-radius search.
pub const BISECTION_STEPS: usize = 20;

impl Default for CurveBudget {
    fn default() -> Self {
        Self {
            constructions: BISECTION_STEPS,
            pairs: 2,
            max_support: None,
        }
    }
}

impl CurveBudget {
    /// Analytic values only.
    pub fn analytic() -> Self {
        Self {
            constructions: 0,
            ..Self::default()
        }
    }
}

/// Parses `a:b:step` into the inclusive grid `a, a+step, …` (at most `b`).
/// An empty string is the empty grid.
pub fn parse_eps_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| domain(format!("bad grid `{text}`: {e}")))?;
    let [a, b, step] = parts[..] else {
        return Err(domain(format!("grid must look like a:b:step, got `{text}`")));
    };
    if !(step > 0.0) {
        return Err(domain(format!("grid step must be positive, got {step}")));
    }
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let x = a + step * k as f64;
        let x = (x * 1e12).round() / 1e12;
        if x > b + 1e-12 {
            break;
        }
        check_eps(x)?;
        out.push(x);
        k += 1;
    }
    Ok(out)
}

/// Largest `ρ ∈ [lo, hi)` for which `build(ρ)` yields a validated
/// certificate, by bisection starting from `lo`.
fn certified_search(
    lo: f64,
    hi: f64,
    steps: usize,
    build: impl Fn(f64) -> Result<DerivationCertificate>,
) -> Option<f64> {
    let works = |rho: f64| build(rho).and_then(|c| validate_certificate(&c)).unwrap_or(false);
    if steps == 0 || !works(lo) {
        return None;
    }
    let (mut good, mut bad) = (lo, hi);
    for _ in 1..steps {
        let mid = 0.5 * (good + bad);
        if works(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(good)
}

fn sample_for(space: Space, eps: f64, budget: &CurveBudget) -> Result<CurveSample> {
    let uni = universal_lower_bound(eps)?;
    let steps = budget.constructions.min(BISECTION_STEPS);
    let partial = budget.constructions < BISECTION_STEPS;
    let pairs = budget.pairs;
    let e1 = SparseVec::unit(1);
    let mut prov = Vec::new();
    let (r_lower, r_upper, big_r_lower, big_r_upper, certified);
    match space {
        Space::Tsirelson => {
            let (r, big_r) = tsirelson_radii(eps)?;
            (r_lower, r_upper, big_r_lower, big_r_upper) = (r, r, big_r, big_r);
            prov.push("r=R analytic (1-eps/4 and 1)".to_string());
            let max_support = budget.max_support.unwrap_or(64);
            certified = certified_search(uni, r, steps, |rho| {
                t_membership_witness(&e1.scale(&rho), eps, pairs, max_support)
            });
        }
        Space::Schlumprecht => {
            let (upper, arg) = s_r_upper_bound(eps, schlumprecht::DEFAULT_N_MAX)?;
            let big_r = s_R_curve(eps)?;
            (r_lower, r_upper, big_r_lower, big_r_upper) = (uni, upper, big_r, big_r);
            prov.push("rLower universal 1-eps/2".to_string());
            prov.push(format!("rUpper scan inf at n={arg}"));
            prov.push("R analytic min(1; log2(3)-eps/2)".to_string());
            certified = certified_search(0.0, big_r, steps, |rho| {
                s_membership_witness(&e1.scale(&rho), eps, pairs)
            });
        }
        Space::Baernstein => {
            let r = mq_radius(eps, 2.0)?;
            (r_lower, r_upper, big_r_lower, big_r_upper) = (r, r, r, r);
            prov.push("r=R analytic sqrt(1-(eps/2)^2)".to_string());
            let opts = baernstein::WitnessOptions {
                pairs,
                max_support: budget.max_support.unwrap_or(1024),
                ..Default::default()
            };
            certified = certified_search(0.0, b_ball_radius(eps)?, steps, |rho| {
                b_membership_witness(&e1.scale(&rho), eps, &opts)
            });
        }
        Space::Orlicz(p) => {
            let ared = p.reduced();
            let n = orlicz::first_n_above_one(ared)?;
            let pp = orlicz::build_phi_psi(n, ared)?;
            let inv = orlicz::invert_epsilon(&pp, eps)?;
            let ratio = inv.r / inv.a;
            (r_lower, r_upper, big_r_lower, big_r_upper) = (uni, ratio, ratio, 1.0);
            prov.push("rLower universal 1-eps/2".to_string());
            prov.push(format!(
                "rUpper=RLower r/a from e1 and y0 (n={n}; delta={:.6e})",
                inv.delta
            ));
            prov.push("RUpper trivial 1".to_string());
            let unit = e1.scale(&(1.0 / space.norm(&e1)));
            certified = certified_search(0.0, 1.0, steps, |rho| spike_witness(space, &unit.scale(&rho), eps, pairs));
        }
    }
    match certified {
        Some(c) => prov.push(format!("certified membership at norm {c:.6} ({pairs} pairs)")),
        None if steps > 0 => prov.push("no certificate found".to_string()),
        None => {}
    }
    if partial {
        prov.push(format!("budget exhausted after {steps} of {BISECTION_STEPS} steps"));
    }
    let big_r_lower = match certified {
        Some(c) if c > big_r_lower && c <= big_r_upper => c,
        _ => big_r_lower,
    };
    Ok(CurveSample {
        eps,
        r_lower,
        r_upper,
        big_r_lower,
        big_r_upper,
        certified_radius: certified,
        partial,
        provenance: prov,
    })
}

/// Assembles analytic radii and certified membership radii over `grid`.
pub fn build_curve(space: Space, grid: &[f64], budget: &CurveBudget) -> Result<RadiusCurve> {
    let samples = grid
        .par_iter()
        .map(|&eps| sample_for(space, eps, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(RadiusCurve { space, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((mq_radius(1.0, 2.0).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(mq_radius(1.0, 1.0).unwrap(), 0.5);
        assert!(mq_radius(1.9999999, 2.0).unwrap() < 1e-3);
        assert_eq!(universal_lower_bound(1.0).unwrap(), 0.5);
        assert_eq!(tsirelson_radii(1.0).unwrap(), (0.75, 1.0));
        assert!(tsirelson_radii(2.0).is_err());
    }

    #[test]
    fn space_tags() {
        assert_eq!("Tsirelson".parse::<Space>().unwrap(), Space::Tsirelson);
        assert!(matches!("hilbert".parse::<Space>(), Err(Error::UnknownSpace(_))));
        let json = serde_json::to_string(&Space::Orlicz(OrliczParams { a: 2.0, b: 1.0 })).unwrap();
        assert_eq!(json, r#"{"kind":"orlicz","a":2.0,"b":1.0}"#);
    }

    #[test]
    fn grids() {
        assert_eq!(parse_eps_grid("0.5:1.5:0.5").unwrap(), vec![0.5, 1.0, 1.5]);
        assert_eq!(parse_eps_grid("0.1:1.9:0.1").unwrap().len(), 19);
        assert!(parse_eps_grid("").unwrap().is_empty());
        assert!(parse_eps_grid("0:1:0.5").is_err());
        assert!(parse_eps_grid("0.5:1").is_err());
    }

    fn base_cert() -> DerivationCertificate {
        b_membership_witness(&SparseVec::unit(1).scale(&0.5), 1.0, &Default::default()).unwrap()
    }

    #[test]
    fn broken_certificates_fail() {
        let mut cert = base_cert();
        assert!(validate_certificate(&cert).unwrap());
        cert.eps = 1.99;
        assert!(!validate_certificate(&cert).unwrap());
        let mut cert = base_cert();
        cert.pairs[0].plus = cert.pairs[0].plus.scale(&1.5);
        assert!(!validate_certificate(&cert).unwrap());
        let mut cert = base_cert();
        cert.pairs.clear();
        assert!(validate_certificate(&cert).is_err());
    }

    #[test]
    fn radial_scaling_keeps_gaps() {
        let cert = base_cert();
        let half = radial_scale(&cert, 0.5).unwrap();
        assert!(validate_certificate(&half).unwrap());
        assert_eq!(half.point, cert.point.scale(&0.5));
        for (a, u) in half.pairs.iter().zip(&cert.pairs) {
            let g1 = b_norm(&a.plus.sub(&a.minus)).value;
            let g0 = b_norm(&u.plus.sub(&u.minus)).value;
            assert!((g1 - g0).abs() < 1e-12);
        }
        assert!(radial_scale(&cert, 1.0).is_err());
    }

    #[test]
    fn tsirelson_curve_rows() {
        let curve = build_curve(Space::Tsirelson, &[0.5, 1.0, 1.5], &CurveBudget::analytic()).unwrap();
        let r: Vec<f64> = curve.samples.iter().map(|s| s.r_lower).collect();
        assert_eq!(r, vec![0.875, 0.75, 0.625]);
        assert!(curve.invariant_violations().is_empty());
    }

    #[test]
    fn schlumprecht_curve_row() {
        let curve = build_curve(Space::Schlumprecht, &[1.0], &CurveBudget::default()).unwrap();
        let s = &curve.samples[0];
        assert!((s.r_upper - 0.8899750).abs() < 1e-6);
        assert_eq!(s.big_r_upper, 1.0);
        assert!(curve.invariant_violations().is_empty(), "{:?}", curve.invariant_violations());
    }
}
