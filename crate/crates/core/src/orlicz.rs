//! Orlicz sequence spaces for `M_{A,B}(t) = At⁴ + Bt²`.
//!
//! The Luxemburg norm solves `λ⁴ − Bλ²‖x‖₂² − A‖x‖₄⁴ = 0`, so
//!
//! ```text
//! ‖x‖_{A,B} = √(f(x)/2),   f(x) = B‖x‖₂² + √(B²‖x‖₂⁴ + 4A‖x‖₄⁴).
//! ```
//!
//! The minimization analysis works in the reduced form `B = 1`,
//! `M(t) = ¼A t⁴ + t²`, where `f(x) = ‖x‖₂² + √(‖x‖₂⁴ + A‖x‖₄⁴)`. A general
//! pair maps to the reduced parameter `A_red = 4A/B²`, and
//! `‖x‖_{A,B} = √B · ‖x‖_{A/B², 1}`.
//!
//! Throughout, `c = 1 + √(1+A_red)`, `r = √(c/2)` is the norm of `e₁`,
//! `y₀ = α_n(e₁+…+e_n)` has the same norm, and `U`, `V` bound
//! `f(e₁ + τe_k)` and `f(y₀ + u)` from above and below.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, Error, Result};
use crate::numeric::{bisect, golden_min, log_grid};
use crate::sampling::{random_sparse, sample_rng};
use crate::szlenk::{validate_certificate, DerivationCertificate, PerturbationPair, Space};
use crate::vecspace::SparseVec;

/// Coefficients of `M_{A,B}(t) = At⁴ + Bt²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrliczParams {
    pub a: f64,
    pub b: f64,
}

impl OrliczParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(domain(format!("Orlicz parameters need A > 0 and B > 0, got A={a}, B={b}")));
        }
        Ok(Self { a, b })
    }

    /// The parameters whose norm is the reduced norm with parameter `ared`.
    pub fn from_reduced(ared: f64) -> Self {
        Self { a: ared / 4.0, b: 1.0 }
    }

    /// `A_red = 4A/B²`.
    pub fn reduced(&self) -> f64 {
        4.0 * self.a / (self.b * self.b)
    }

    /// `M_{A,B}(t)`.
    pub fn orlicz_fn(&self, t: f64) -> f64 {
        let t2 = t * t;
        self.a * t2 * t2 + self.b * t2
    }
}

/// `(m, Σ(x/m)², Σ(x/m)⁴)` with `m = ‖x‖_∞`.
fn moments(v: &SparseVec) -> (f64, f64, f64) {
    let m = v.max_abs();
    if m == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let (mut s2, mut s4) = (0.0, 0.0);
    for (_, x) in v.iter() {
        let y = (x / m) * (x / m);
        s2 += y;
        s4 += y * y;
    }
    (m, s2, s4)
}

/// `‖v‖_{A,B} = √(f(v)/2)`.
pub fn closed_form_norm(v: &SparseVec, p: &OrliczParams) -> f64 {
    let (m, s2, s4) = moments(v);
    if m == 0.0 {
        return 0.0;
    }
    let f = p.b * s2 + (p.b * p.b * s2 * s2 + 4.0 * p.a * s4).sqrt();
    m * (f / 2.0).sqrt()
}

/// Reduced `f(v) = ‖v‖₂² + √(‖v‖₂⁴ + A‖v‖₄⁴)`.
pub fn reduced_f(v: &SparseVec, ared: f64) -> f64 {
    let (m, s2, s4) = moments(v);
    m * m * (s2 + (s2 * s2 + ared * s4).sqrt())
}

/// Reduced norm `√(f(v)/2)`.
pub fn reduced_norm(v: &SparseVec, ared: f64) -> f64 {
    closed_form_norm(v, &OrliczParams::from_reduced(ared))
}

/// Luxemburg norm by bisection on `Σ M(|x_i|/λ) = 1`.
pub fn luxemburg_oracle(v: &SparseVec, p: &OrliczParams) -> Result<f64> {
    if v.is_zero() {
        return Err(domain("the Luxemburg equation has no positive root for the zero vector"));
    }
    let modular = |lambda: f64| v.iter().map(|(_, x)| p.orlicz_fn(x.abs() / lambda)).sum::<f64>() - 1.0;
    let start = v.max_abs();
    let (mut lo, mut hi) = (start, start);
    while modular(hi) > 0.0 {
        hi *= 2.0;
    }
    while modular(lo) < 0.0 {
        lo /= 2.0;
    }
    bisect(modular, lo, hi, 1e-16, 400)
}

/// `c = 1 + √(1+A)`.
fn c_of(ared: f64) -> f64 {
    1.0 + (1.0 + ared).sqrt()
}

/// `α_n = √((1+√(1+A))/(n+√(n²+An)))`.
pub fn alpha_n(n: usize, ared: f64) -> f64 {
    let n = n as f64;
    (c_of(ared) / (n + (n * n + ared * n).sqrt())).sqrt()
}

/// `n α_n²`.
pub fn n_alpha_sq(n: usize, ared: f64) -> f64 {
    let a = alpha_n(n, ared);
    n as f64 * a * a
}

/// `lim n α_n² = (1+√(1+A))/2`.
pub fn n_alpha_limit(ared: f64) -> f64 {
    c_of(ared) / 2.0
}

/// `r = ‖e₁‖ = √((1+√(1+A))/2)`.
pub fn r_of(ared: f64) -> f64 {
    (c_of(ared) / 2.0).sqrt()
}

/// Smallest `n` with `n α_n² > 1`.
pub fn first_n_above_one(ared: f64) -> Result<usize> {
    (1..=1_000_000)
        .find(|&n| n_alpha_sq(n, ared) > 1.0)
        .ok_or_else(|| Error::Bracket(format!("n α_n² <= 1 for every n <= 10⁶ (A = {ared})")))
}

/// `y₀ = α_n(e₁ + … + e_n)`.
pub fn y0(n: usize, ared: f64) -> SparseVec {
    SparseVec::indicator(1..=n).scale(&alpha_n(n, ared))
}

/// Constants of the minimization problem for fixed `n` and `A`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Setting {
    pub n: usize,
    pub ared: f64,
    /// `n α_n²`
    pub na2: f64,
    /// `(n² + An) α_n⁴`
    pub q: f64,
    pub c: f64,
}

impl Setting {
    pub fn new(n: usize, ared: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n >= 1 required"));
        }
        if !(ared > 0.0 && ared.is_finite()) {
            return Err(domain(format!("A must be positive, got {ared}")));
        }
        let a2 = alpha_n(n, ared).powi(2);
        let nf = n as f64;
        Ok(Self {
            n,
            ared,
            na2: nf * a2,
            q: (nf * nf + ared * nf) * a2 * a2,
            c: c_of(ared),
        })
    }

    /// `F(s,t) = nα² + s + √((n²+An)α⁴ + 2nα²s + s² + At²)`.
    pub fn objective(&self, s: f64, t: f64) -> f64 {
        self.na2 + s + (self.q + 2.0 * self.na2 * s + s * s + self.ared * t * t).sqrt()
    }

    /// `g(s,t) = s + √(s² + At²) − μ`.
    pub fn g(&self, s: f64, t: f64, mu: f64) -> f64 {
        s + (s * s + self.ared * t * t).sqrt() - mu
    }

    /// `h₁(s,t) = −t`.
    pub fn h1(&self, _s: f64, t: f64) -> f64 {
        -t
    }

    /// `h₂(s,t) = t − s`.
    pub fn h2(&self, s: f64, t: f64) -> f64 {
        t - s
    }

    /// `V₁ = nα² + μ/2 + √((n²+An)α⁴ + nα²μ + μ²/4)`.
    pub fn v1(&self, mu: f64) -> f64 {
        self.na2 + 0.5 * mu + (self.q + self.na2 * mu + 0.25 * mu * mu).sqrt()
    }

    /// `V₂ = nα² + μ/c + √((n²+An)α⁴ + 2nα²μ/c + (1+A)μ²/c²)`.
    pub fn v2(&self, mu: f64) -> f64 {
        let c = self.c;
        self.na2 + mu / c + (self.q + 2.0 * self.na2 * mu / c + (1.0 + self.ared) * mu * mu / (c * c)).sqrt()
    }

    /// `V(x) = V₂(2x²)`.
    pub fn v(&self, x: f64) -> f64 {
        self.c + self.v_excess(x)
    }

    /// `V(x) − 2r²`, evaluated without cancellation (`V(0) = 2r²`).
    pub fn v_excess(&self, x: f64) -> f64 {
        let c = self.c;
        let x2 = x * x;
        let extra = 4.0 * self.na2 * x2 / c + 4.0 * (1.0 + self.ared) * x2 * x2 / (c * c);
        2.0 * x2 / c + extra / ((self.q + extra).sqrt() + self.q.sqrt())
    }

    /// `U(x)`.
    pub fn u(&self, x: f64) -> f64 {
        u_function(x, self.ared)
    }

    /// `U(x) − 2r²`, evaluated without cancellation.
    pub fn u_excess(&self, x: f64) -> f64 {
        u_excess(x, self.ared)
    }

    /// `V(x) − U(x)`.
    pub fn v_minus_u(&self, x: f64) -> f64 {
        let c = self.c;
        let x2 = x * x;
        let quartic = 4.0 * (1.0 + self.ared) * x2 * x2 / (c * c);
        let pv = self.q + 4.0 * self.na2 * x2 / c + quartic;
        let pu = 1.0 + self.ared + 4.0 * x2 / c + quartic;
        let diff = (self.q - (1.0 + self.ared)) + 4.0 * (self.na2 - 1.0) * x2 / c;
        (self.na2 - 1.0) + diff / (pv.sqrt() + pu.sqrt())
    }
}

/// `U(x) = 1 + 2x²/c + √(1+A + 4x²/c + 4(1+A)x⁴/c²)`.
pub fn u_function(x: f64, ared: f64) -> f64 {
    c_of(ared) + u_excess(x, ared)
}

fn u_excess(x: f64, ared: f64) -> f64 {
    let c = c_of(ared);
    let x2 = x * x;
    let base = 1.0 + ared;
    let extra = 4.0 * x2 / c + 4.0 * base * x2 * x2 / (c * c);
    2.0 * x2 / c + extra / ((base + extra).sqrt() + base.sqrt())
}

/// Which boundary piece of the feasible curve carries the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    BoundaryTEqS,
    BoundaryTEq0,
    Interior,
}

/// Outcome of [`kkt_minimize`].
#[derive(Clone, Debug, Serialize)]
pub struct KktReport {
    pub n: usize,
    pub ared: f64,
    pub mu: f64,
    pub v1: f64,
    pub v2: f64,
    pub grid_min: f64,
    pub argmin_s: f64,
    pub argmin_t: f64,
    pub case_label: CaseLabel,
    /// `F` at the `t = 0` end of the feasible curve.
    pub endpoint_t0: f64,
    /// Multiplier of `g` at `s = t`.
    pub lambda: f64,
    /// Multiplier of `h₂` at `s = t`; dual feasibility needs it nonnegative.
    pub mu2: f64,
    pub passed: bool,
}

/// Minimizes `F` over `{g = 0, 0 ≤ t ≤ s}`.
///
/// The constraint `g = 0` gives `s = (μ² − At²)/(2μ)`, and `t ≤ s` holds
/// exactly for `t ≤ μ/c`, so the feasible set is a curve parameterized by
/// `t ∈ [0, μ/c]`. A uniform grid locates the best cell, golden-section
/// search refines it and both endpoints are always candidates.
pub fn kkt_minimize(mu: f64, n: usize, ared: f64, tol: f64) -> Result<KktReport> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(domain(format!("μ must be positive, got {mu}")));
    }
    let st = Setting::new(n, ared)?;
    let t_max = mu / st.c;
    let s_of = |t: f64| (mu * mu - ared * t * t) / (2.0 * mu);
    let along = |t: f64| st.objective(s_of(t).max(t), t);
    let cells = 4000;
    let grid: Vec<f64> = (0..=cells).map(|k| t_max * k as f64 / cells as f64).collect();
    let best = (0..=cells)
        .min_by(|&i, &j| along(grid[i]).total_cmp(&along(grid[j])))
        .expect("nonempty grid");
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(cells)];
    let refined = golden_min(along, lo, hi, 1e-10 * t_max.max(1e-300));
    let candidates = [(0.0, along(0.0)), (t_max, along(t_max)), refined];
    let (t_star, grid_min) = candidates
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("three candidates");
    let case_label = if (t_max - t_star).abs() <= 1e-6 * t_max {
        CaseLabel::BoundaryTEqS
    } else if t_star <= 1e-6 * t_max {
        CaseLabel::BoundaryTEq0
    } else {
        CaseLabel::Interior
    };
    let (v1, v2) = (st.v1(mu), st.v2(mu));
    let endpoint_t0 = along(0.0);
    let (lambda, mu2) = multipliers_at_diagonal(&st, t_max);
    let passed = (grid_min - v2).abs() <= tol
        && (endpoint_t0 - v1).abs() <= tol
        && v2 < v1
        && grid_min >= v1.min(v2) - tol
        && case_label == CaseLabel::BoundaryTEqS
        && mu2 >= 0.0;
    Ok(KktReport {
        n,
        ared,
        mu,
        v1,
        v2,
        grid_min,
        argmin_s: s_of(t_star).max(t_star),
        argmin_t: t_star,
        case_label,
        endpoint_t0,
        lambda,
        mu2,
        passed,
    })
}

/// Solves `∇F + λ∇g + μ₂∇h₂ = 0` at `s = t = τ` (with `h₁` inactive).
fn multipliers_at_diagonal(st: &Setting, tau: f64) -> (f64, f64) {
    let (s, t) = (tau, tau);
    let p = (st.q + 2.0 * st.na2 * s + s * s + st.ared * t * t).sqrt();
    let r = (s * s + st.ared * t * t).sqrt();
    let (fs, ft) = (1.0 + (st.na2 + s) / p, st.ared * t / p);
    let (gs, gt) = (1.0 + s / r, st.ared * t / r);
    let lambda = -(fs + ft) / (gs + gt);
    (lambda, fs + lambda * gs)
}

/// Outcome of [`claim_check`].
#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub n: usize,
    pub ared: f64,
    pub n_alpha_sq: f64,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `f(y₀+u) − V(‖u‖)` seen.
    pub min_margin: f64,
    pub worst_sample: usize,
    /// `f(y₀) − V(0)`.
    pub zero_gap: f64,
    pub passed: bool,
}

/// Checks `f(y₀ + u) ≥ V(‖u‖) − slack` on random `u` supported beyond `n`.
///
/// Every tenth sample is a single coordinate, the case where the bound is
/// attained.
pub fn claim_check(n: usize, ared: f64, samples: usize, seed: u64, slack: f64) -> Result<ClaimReport> {
    let st = Setting::new(n, ared)?;
    let y = y0(n, ared);
    let margins: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, 0xc1a1, k as u32);
            let first = n + 1 + rng.gen_range(0..20);
            let width = if k % 10 == 0 { 1 } else { rng.gen_range(1..=8) };
            let dir = random_sparse(&mut rng, first, first + width - 1, width, 1.0);
            let size = 10f64.powf(rng.gen_range(-3.0..1.0));
            let u = dir.scale(&(size / reduced_norm(&dir, ared)));
            reduced_f(&y.add(&u), ared) - st.v(reduced_norm(&u, ared))
        })
        .collect();
    let violations = margins.iter().filter(|m| **m < -slack).count();
    let (worst_sample, min_margin) = margins
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, f64::INFINITY));
    let zero_gap = reduced_f(&y, ared) - st.v(0.0);
    Ok(ClaimReport {
        n,
        ared,
        n_alpha_sq: st.na2,
        samples,
        violations,
        min_margin,
        worst_sample,
        zero_gap,
        passed: violations == 0 && zero_gap.abs() <= slack.max(1e-12),
    })
}

/// `U(x) < V(x)` on the points of `grid`. Requires `n α_n² > 1`.
pub fn u_lt_v_check(n: usize, ared: f64, grid: &[f64]) -> Result<bool> {
    let st = Setting::new(n, ared)?;
    if st.na2 <= 1.0 {
        return Err(precondition(format!("n α_n² > 1 fails ({})", st.na2)));
    }
    Ok(grid.iter().all(|&x| st.v_minus_u(x) > 0.0))
}

/// Comparison functions `φ`, `ψ` for `x₀ = e₁` and `y₀ = α_n(e₁+…+e_n)`.
///
/// Every quantity is handled as its excess over `2r²`. The interpolants are
///
/// ```text
/// Ũ = ½(U + min{2(r+x)², V}),   Ṽ = ½(Ũ + V),
/// ```
///
/// so `U < Ũ < min{2(r+x)², Ṽ}` and `Ṽ < V`, which gives
/// `ψ(δ) < min{δ, φ(δ)}` together with both membership conditions.
#[derive(Clone, Debug, Serialize)]
pub struct PhiPsi {
    pub setting: Setting,
    pub r: f64,
    pub grid_points: usize,
    /// Grid points where the literal chain `2(r+x)² < V(x)` fails. Since
    /// `V(x)` is attained by `y₀ + τe_{n+1}` with `‖τe_{n+1}‖ = x`, the
    /// triangle inequality gives `V(x) ≤ 2(r+x)²` everywhere.
    pub literal_chain_failures: usize,
}

impl PhiPsi {
    fn ball_excess(&self, x: f64) -> f64 {
        4.0 * self.r * x + 2.0 * x * x
    }

    pub fn u_tilde_excess(&self, x: f64) -> f64 {
        let st = &self.setting;
        0.5 * (st.u_excess(x) + self.ball_excess(x).min(st.v_excess(x)))
    }

    pub fn v_tilde_excess(&self, x: f64) -> f64 {
        0.5 * (self.u_tilde_excess(x) + self.setting.v_excess(x))
    }

    pub fn u_tilde(&self, x: f64) -> f64 {
        self.setting.c + self.u_tilde_excess(x)
    }

    pub fn v_tilde(&self, x: f64) -> f64 {
        self.setting.c + self.v_tilde_excess(x)
    }

    /// `√(e/2 + r²) − r` without cancellation.
    fn lift(&self, excess: f64) -> f64 {
        let half = 0.5 * excess;
        half / ((half + self.r * self.r).sqrt() + self.r)
    }

    /// `φ(δ) = √(Ṽ(δ)/2) − r`.
    pub fn phi(&self, delta: f64) -> f64 {
        self.lift(self.v_tilde_excess(delta))
    }

    /// `ψ(δ) = √(Ũ(δ)/2) − r`.
    pub fn psi(&self, delta: f64) -> f64 {
        self.lift(self.u_tilde_excess(delta))
    }

    /// `√(U(x)/2) − r`, the excess norm of `e₁ + τe_k` with `‖τe_k‖ = x`.
    pub fn u_lift(&self, x: f64) -> f64 {
        self.lift(self.setting.u_excess(x))
    }

    /// `√(V(x)/2) − r`, the Claim's lower bound for `‖y₀ + u‖ − r`.
    pub fn v_lift(&self, x: f64) -> f64 {
        self.lift(self.setting.v_excess(x))
    }
}

/// Builds `φ`, `ψ` and validates the chain on a log grid over `[1e-6, 1e6]`.
pub fn build_phi_psi(n: usize, ared: f64) -> Result<PhiPsi> {
    let setting = Setting::new(n, ared)?;
    if setting.na2 <= 1.0 {
        return Err(precondition(format!("n α_n² > 1 fails ({})", setting.na2)));
    }
    let mut pp = PhiPsi {
        setting,
        r: r_of(ared),
        grid_points: 0,
        literal_chain_failures: 0,
    };
    let grid = log_grid(1e-6, 1e6, 241);
    for &x in &grid {
        let u = setting.u_excess(x);
        let v = setting.v_excess(x);
        let ball = pp.ball_excess(x);
        let ut = pp.u_tilde_excess(x);
        let vt = pp.v_tilde_excess(x);
        if ball >= v {
            pp.literal_chain_failures += 1;
        }
        let chain = u < ut && ut < ball && ut < vt && vt < v;
        if !chain {
            return Err(Error::CheckFailed(format!(
                "interpolant chain fails at x = {x}: U={u}, Ũ={ut}, 2(r+x)²={ball}, Ṽ={vt}, V={v} (excess over 2r²)"
            )));
        }
        let (phi, psi) = (pp.phi(x), pp.psi(x));
        if !(psi < x && psi < phi && psi > 0.0) {
            return Err(Error::CheckFailed(format!(
                "ψ(δ) < min{{δ, φ(δ)}} fails at δ = {x}: ψ={psi}, φ={phi}"
            )));
        }
    }
    pp.grid_points = grid.len();
    Ok(pp)
}

/// `ε(δ) = 2δ/(r + ψ(δ))`.
#[allow(non_snake_case)]
pub fn test_L_epsilon(delta: f64, r: f64, psi: &dyn Fn(f64) -> f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(domain(format!("δ must be positive, got {delta}")));
    }
    let p = psi(delta);
    if !(p < delta) {
        return Err(precondition(format!("ψ(δ) < δ fails (ψ = {p}, δ = {delta})")));
    }
    let eps = 2.0 * delta / (r + p);
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::CheckFailed(format!("ε(δ) = {eps} outside (0,2)")));
    }
    Ok(eps)
}

/// Solution of `ε(δ) = ε` and the resulting scale `a = r + ψ(δ)`.
#[derive(Clone, Debug, Serialize)]
pub struct Inversion {
    pub n: usize,
    pub delta: f64,
    pub residual: f64,
    pub a: f64,
    pub r: f64,
}

/// Inverts `ε(δ)` by bisection in `log δ` over `[1e-9, 1e6]`, after checking
/// monotonicity on a grid of that bracket.
pub fn invert_epsilon(pp: &PhiPsi, eps: f64) -> Result<Inversion> {
    if !(eps > 0.0 && eps < 2.0) {
        return Err(domain(format!("ε must lie in (0,2), got {eps}")));
    }
    let r = pp.r;
    let eps_of = |d: f64| 2.0 * d / (r + pp.psi(d));
    let (lo, hi) = (1e-9f64, 1e6f64);
    let grid = log_grid(lo, hi, 600);
    if grid.windows(2).any(|w| eps_of(w[1]) <= eps_of(w[0])) {
        return Err(Error::CheckFailed("ε(δ) is not increasing on the bracket".into()));
    }
    let delta = bisect(|lt: f64| eps_of(lt.exp()) - eps, lo.ln(), hi.ln(), 1e-17, 400)
        .map_err(|e| Error::Bracket(format!("ε(δ) = {eps} not bracketed on [1e-9, 1e6]: {e}")))?
        .exp();
    Ok(Inversion {
        n: pp.setting.n,
        delta,
        residual: (eps_of(delta) - eps).abs(),
        a: r + pp.psi(delta),
        r,
    })
}

/// Outcome of [`not_a_ball_demo`].
#[derive(Clone, Debug, Serialize)]
pub struct NotABallReport {
    pub ared: f64,
    pub eps: f64,
    pub inversion: Inversion,
    pub psi: f64,
    pub phi: f64,
    /// `‖τe_k‖` of the membership perturbation.
    pub step_norm: f64,
    pub membership: DerivationCertificate,
    pub membership_valid: bool,
    /// `|‖x₀‖ − ‖y₀‖|`.
    pub norm_mismatch: f64,
    pub scaled_radius: f64,
    pub samples: usize,
    pub violations: usize,
    /// Smallest `‖y₀ + u‖ − (r + φ(δ))` seen.
    pub min_margin: f64,
    pub passed: bool,
}

/// The two points `x₀/a` and `y₀/a` have the same norm `r/a`; the first is
/// certified to lie in `s_ε B` and the second is checked against the
/// exclusion bound on sampled perturbations.
pub fn not_a_ball_demo(ared: f64, eps: f64, samples: usize, pairs: usize, seed: u64) -> Result<NotABallReport> {
    let n = first_n_above_one(ared)?;
    let pp = build_phi_psi(n, ared)?;
    let inv = invert_epsilon(&pp, eps)?;
    let (r, a, delta) = (inv.r, inv.a, inv.delta);
    let psi = pp.psi(delta);
    let phi = pp.phi(delta);

    // the largest step norm with ‖e₁ + τe_k‖ ≤ a, then halfway towards it
    let target = pp.u_tilde_excess(delta);
    let mut top = 2.0 * delta;
    while pp.setting.u_excess(top) < target {
        top *= 2.0;
    }
    let step_max = bisect(|x| pp.setting.u_excess(x) - target, delta, top, 1e-16, 400)?;
    let step_norm = 0.5 * (delta + step_max);
    let tau = step_norm / r;

    let params = OrliczParams::from_reduced(ared);
    let inv_a = 1.0 / a;
    let point = SparseVec::unit(1).scale(&inv_a);
    let list = (2..2 + pairs.max(1))
        .map(|k| {
            let step = SparseVec::unit(k).scale(&(tau * inv_a));
            PerturbationPair {
                plus: point.add(&step),
                minus: point.sub(&step),
            }
        })
        .collect();
    let membership = DerivationCertificate {
        point,
        eps,
        pairs: list,
        space: Space::Orlicz(params),
        coord_horizon: 2,
        construction: format!("orlicz (e₁ ± τe_k)/a, τ={tau:.6}, a={a:.6}"),
    };
    let membership_valid = validate_certificate(&membership)?;

    let y = y0(n, ared);
    let norm_mismatch = (reduced_norm(&SparseVec::unit(1), ared) - reduced_norm(&y, ared)).abs();
    let bound = r + phi;
    let margins: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, 0xd3b0, k as u32);
            let first = n + 1 + k / 8;
            let width = rng.gen_range(1..=8);
            let dir = random_sparse(&mut rng, first, first + width - 1, width, 1.0);
            let size = delta * (1.0 + 10f64.powf(rng.gen_range(-6.0..1.0)));
            let u = dir.scale(&(size / reduced_norm(&dir, ared)));
            reduced_norm(&y.add(&u), ared) - bound
        })
        .collect();
    let violations = margins.iter().filter(|m| **m < 0.0).count();
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let passed = membership_valid && violations == 0 && inv.residual < 1e-9 && norm_mismatch <= 1e-12;
    Ok(NotABallReport {
        ared,
        eps,
        scaled_radius: r / a,
        inversion: inv,
        psi,
        phi,
        step_norm,
        membership,
        membership_valid,
        norm_mismatch,
        samples,
        violations,
        min_margin,
        passed,
    })
}

/// `h(t) = √(a+t) − √(b+t)` is strictly increasing for `0 < a < b`; checked
/// on random triples.
pub fn increasing_aid_check(samples: usize, seed: u64) -> usize {
    (0..samples)
        .filter(|&k| {
            let mut rng = sample_rng(seed, 0x1ac, k as u32);
            let a = rng.gen_range(1e-3..10.0);
            let b = a + rng.gen_range(1e-3..10.0);
            let t1 = rng.gen_range(0.0..10.0);
            let t2 = t1 + rng.gen_range(1e-3..10.0);
            let h = |t: f64| (a - b) / ((a + t).sqrt() + (b + t).sqrt());
            !(h(t2) > h(t1))
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let p = OrliczParams::new(1.0, 1.0).unwrap();
        let e1 = SparseVec::unit(1);
        let expected = ((1.0 + 5f64.sqrt()) / 2.0).sqrt();
        assert!((closed_form_norm(&e1, &p) - expected).abs() < 1e-15);
        assert!((luxemburg_oracle(&e1, &p).unwrap() - expected).abs() < 1e-14);
        assert_eq!(closed_form_norm(&SparseVec::zero(), &p), 0.0);
        assert!(luxemburg_oracle(&SparseVec::zero(), &p).is_err());
        let tiny = OrliczParams::new(1e-12, 1.0).unwrap();
        let v = SparseVec::from_pairs([(1, 3.0), (4, -4.0)]).unwrap();
        assert!((closed_form_norm(&v, &tiny) - 5.0).abs() < 1e-6);
        let two = SparseVec::indicator(1..=2);
        assert!((luxemburg_oracle(&two, &tiny).unwrap() - 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn reduced_mapping() {
        let p = OrliczParams::new(0.7, 2.5).unwrap();
        let v = SparseVec::from_pairs([(2, 0.3), (5, -1.1), (6, 0.4)]).unwrap();
        let lhs = closed_form_norm(&v, &p);
        let rhs = p.b.sqrt() * reduced_norm(&v, p.reduced());
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn alpha_values() {
        assert!((alpha_n(1, 3.0) - 1.0).abs() < 1e-15);
        assert!((n_alpha_sq(5, 3.0) - 1.3245553).abs() < 1e-7);
        assert!((n_alpha_sq(1_000_000, 3.0) - 1.5).abs() < 1e-5);
        assert_eq!(n_alpha_limit(3.0), 1.5);
    }

    #[test]
    fn objective_and_constraints() {
        let st = Setting::new(5, 3.0).unwrap();
        let y = y0(5, 3.0);
        assert!((st.objective(0.0, 0.0) - reduced_f(&y, 3.0)).abs() < 1e-14);
        assert_eq!(st.g(0.5, 0.0, 1.0), 0.0);
        let t = 1.0 / st.c;
        assert!(st.g(t, t, 1.0).abs() < 1e-15);
        assert!((st.v1(1.0) - 3.9177993).abs() < 1e-6);
        assert!((st.v2(1.0) - 3.6912593).abs() < 1e-6);
        let small = 1e-9;
        let origin = st.objective(0.0, 0.0);
        assert!((origin - 2.0 * r_of(3.0).powi(2)).abs() < 1e-14);
        assert!((st.v1(small) - origin).abs() < 1e-6);
        assert!((st.v2(small) - origin).abs() < 1e-6);
    }

    #[test]
    fn kkt_examples() {
        let rep = kkt_minimize(1.0, 5, 3.0, 1e-8).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.case_label, CaseLabel::BoundaryTEqS);
        assert!(kkt_minimize(2.0, 8, 1.0, 1e-8).unwrap().passed);
        assert!(kkt_minimize(0.0, 8, 1.0, 1e-8).is_err());
    }

    #[test]
    fn u_matches_spike() {
        let ared = 3.0;
        let r = r_of(ared);
        for &tau in &[0.0, 0.1, 1.0, 7.5] {
            let v = SparseVec::from_pairs([(1, 1.0), (4, tau)]).unwrap();
            let x = reduced_norm(&SparseVec::unit(4).scale(&tau), ared);
            assert!((x - tau * r).abs() < 1e-14);
            let lhs = reduced_f(&v, ared);
            assert!((lhs - u_function(x, ared)).abs() < 1e-12 * lhs);
        }
        assert!((u_function(0.0, ared) - 2.0 * r * r).abs() < 1e-15);
    }

    #[test]
    fn u_below_v() {
        assert!(u_lt_v_check(5, 3.0, &log_grid(1e-6, 1e6, 121)).unwrap());
        assert!(matches!(u_lt_v_check(1, 3.0, &[1.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn phi_psi() {
        let pp = build_phi_psi(5, 3.0).unwrap();
        assert!(pp.psi(1.0) < 1.0);
        assert!(pp.psi(1e-9) < 1e-8 && pp.phi(1e-9) < 1e-8);
        assert_eq!(pp.literal_chain_failures, 241);
        assert_eq!(pp.grid_points, 241);
    }

    #[test]
    fn epsilon_map() {
        let e = test_L_epsilon(1.0, 1.0, &|_| 0.5).unwrap();
        assert!((e - 4.0 / 3.0).abs() < 1e-15);
        assert!(test_L_epsilon(1.0, 1.0, &|_| 1.0).is_err());
        let pp = build_phi_psi(5, 3.0).unwrap();
        let psi = |d: f64| pp.psi(d);
        assert!(test_L_epsilon(1e-8, pp.r, &psi).unwrap() < 1e-7);
        let far = test_L_epsilon(1e6, pp.r, &psi).unwrap();
        assert!(far > 1.99 && far < 2.0);
    }

    #[test]
    fn claim_small_run() {
        let rep = claim_check(5, 3.0, 500, 1, 1e-10).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn demo_small_run() {
        let rep = not_a_ball_demo(3.0, 1.0, 100, 2, 1).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.scaled_radius < 1.0);
    }

    #[test]
    fn increasing_aid() {
        assert_eq!(increasing_aid_check(1000, 5), 0);
    }
}
