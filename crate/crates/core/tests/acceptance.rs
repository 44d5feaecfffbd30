//! End-to-end acceptance criteria. Prints one line per criterion and exits
//! nonzero if any fails or exceeds its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use szlenk_lab::baernstein::{self, b_ball_radius, easy_lemma_check, mstar_failure_demo, partlemma_check};
use szlenk_lab::orlicz::{self, closed_form_norm, kkt_minimize, luxemburg_oracle, n_alpha_sq, OrliczParams};
use szlenk_lab::sampling::{random_rational, random_sparse, sample_rng};
use szlenk_lab::schlumprecht::{self, phi, s_membership_witness, s_norm, SchlumprechtTailSetup};
use szlenk_lab::szlenk::{self, build_curve, mq_radius, parse_eps_grid, radial_scale, validate_certificate, CurveBudget};
use szlenk_lab::tsirelson::{self, t_block_norm, t_norm, t_norm_oracle};
use szlenk_lab::{Result, Space, SparseVec};

const SEED: u64 = 0x5a1e_2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn tsirelson_oracle() -> Result<Outcome> {
    let mismatches = (0..500u32)
        .into_par_iter()
        .filter(|&k| {
            let v = random_rational(&mut sample_rng(SEED, 1, k), 14, 8);
            t_norm(&v).value != t_norm_oracle(&v, 8).expect("support within cap")
        })
        .count();
    outcome(mismatches == 0, format!("500 rational vectors, {mismatches} mismatches"))
}

fn tsirelson_blocks() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut cases = 0;
    for a in 2..=12 {
        for m in 2..=a {
            cases += 1;
            let v = SparseVec::<f64>::indicator(a..=a + m - 1).to_rational();
            let exact = t_norm(&v).value;
            let expected = szlenk_lab::Rational::new((m as i64).into(), 2.into());
            if exact != expected || t_block_norm(a, m)? != m as f64 / 2.0 {
                bad.push((a, m));
            }
        }
    }
    outcome(bad.is_empty(), format!("{cases} blocks exact, failures {bad:?}"))
}

fn tsirelson_curve() -> Result<Outcome> {
    let grid = parse_eps_grid("0.1:1.9:0.1")?;
    let curve = build_curve(Space::Tsirelson, &grid, &CurveBudget::analytic())?;
    let exact = curve.samples.iter().all(|s| {
        s.r_lower == 1.0 - s.eps / 4.0 && s.r_upper == 1.0 - s.eps / 4.0 && s.big_r_lower == 1.0 && s.big_r_upper == 1.0
    });
    let mut certs = Vec::new();
    for eps in [0.5, 1.0, 1.5] {
        let rho = 1.0 - eps / 4.0 - 0.01;
        let cert = tsirelson::t_membership_witness(&SparseVec::unit(1).scale(&rho), eps, 2, 400)?;
        certs.push(validate_certificate(&cert)?);
    }
    let ok = exact && certs.iter().all(|c| *c);
    outcome(ok, format!("{} grid rows exact = {exact}; certificates {certs:?}", grid.len()))
}

fn schlumprecht_flat() -> Result<Outcome> {
    let mut worst = 0f64;
    for n in 1..=25 {
        worst = worst.max((s_norm(&SparseVec::indicator(1..=n)).value - n as f64 / phi(n)?).abs());
    }
    outcome(worst <= 1e-12, format!("max |‖Σe_j‖ − n/φ(n)| = {worst:.3e}"))
}

fn schlumprecht_radius() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut ok = true;
    for eps in [1.3, 1.5, 1.8] {
        let r = 3f64.log2() - eps / 2.0 - 0.01;
        let cert = s_membership_witness(&SparseVec::unit(1).scale(&r), eps, 3)?;
        let valid = validate_certificate(&cert)?;
        let tail = schlumprecht::s_tailbound_check(&SchlumprechtTailSetup::centered(eps), 200, SEED)?;
        let tested = tail.samples - tail.rejected;
        ok &= valid && tail.passed && tested == 200;
        parts.push(format!("ε={eps}: cert {valid}, tail {}/{tested} ok", tested - tail.violations));
    }
    outcome(ok, parts.join("; "))
}

fn baernstein_suite() -> Result<Outcome> {
    let easy: Vec<f64> = (1..=6).map(|n| easy_lemma_check(n, 14)).collect::<Result<_>>()?;
    let easy_ok = easy.iter().zip(1..).all(|(v, n)| *v == n as f64);
    let violations = (0..1000u32)
        .into_par_iter()
        .filter(|&k| {
            let mut rng = sample_rng(SEED, 3, k);
            let v = random_sparse(&mut rng, 1, 16, 10, 3.0);
            let split = rng.gen_range(0..=17);
            !partlemma_check(&v, split, 14, 1e-12).expect("support within cap")
        })
        .count();
    let grid = parse_eps_grid("0.25:1.75:0.25")?;
    let curve = build_curve(Space::Baernstein, &grid, &CurveBudget::default())?;
    let mut worst_gap = 0f64;
    let mut below = true;
    for s in &curve.samples {
        let radius = b_ball_radius(s.eps)?;
        let cert = s.certified_radius.unwrap_or(0.0);
        below &= cert <= radius;
        worst_gap = worst_gap.max(radius - cert);
    }
    let m = mstar_failure_demo()?;
    let mstar_ok = (m.first_expected - 2f64.sqrt()).abs() <= 1e-12
        && (m.second_expected - (2.0 + 2f64.sqrt()).sqrt()).abs() <= 1e-12
        && m.max_error <= 1e-12;
    let ok = easy_ok && violations == 0 && below && worst_gap <= 0.01 && mstar_ok;
    outcome(
        ok,
        format!(
            "easy lemma {easy_ok}, partlemma violations {violations}/1000, certified gap ≤ {worst_gap:.4}, (M*) {mstar_ok}"
        ),
    )
}

fn orlicz_closed_form() -> Result<Outcome> {
    let worst = (0..1000u32)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(SEED, 7, k);
            let p = OrliczParams::new(rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0)).expect("positive");
            let v = random_sparse(&mut rng, 1, 30, 12, 2.0);
            (closed_form_norm(&v, &p) - luxemburg_oracle(&v, &p).expect("nonzero vector")).abs()
        })
        .reduce(|| 0.0, f64::max);
    outcome(worst < 1e-10, format!("max discrepancy {worst:.3e}"))
}

const MUS: [f64; 3] = [0.5, 1.0, 2.0];
const NS: [usize; 3] = [3, 5, 8];
const AREDS: [f64; 3] = [1.0, 3.0, 10.0];

fn kkt() -> Result<Outcome> {
    let mut worst_min = 0f64;
    let mut worst_end = 0f64;
    let mut ordered = true;
    for mu in MUS {
        for n in NS {
            for a in AREDS {
                assert!(n_alpha_sq(n, a) > 1.0);
                let r = kkt_minimize(mu, n, a, 1e-8)?;
                worst_min = worst_min.max((r.grid_min - r.v2).abs());
                worst_end = worst_end.max((r.endpoint_t0 - r.v1).abs());
                ordered &= r.v2 < r.v1;
            }
        }
    }
    let ok = worst_min <= 1e-8 && worst_end <= 1e-8 && ordered;
    outcome(ok, format!("27 triples: |min − V₂| ≤ {worst_min:.2e}, |F(t=0) − V₁| ≤ {worst_end:.2e}, V₂ < V₁ {ordered}"))
}

fn claim() -> Result<Outcome> {
    let mut violations = 0;
    let mut margin = f64::INFINITY;
    for n in NS {
        for a in AREDS {
            let r = orlicz::claim_check(n, a, 10_000, SEED, 1e-10)?;
            violations += r.violations;
            margin = margin.min(r.min_margin);
        }
    }
    outcome(violations == 0, format!("9 × 10⁴ samples, {violations} violations, min margin {margin:.3e}"))
}

fn not_a_ball() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut ok = true;
    for eps in [0.1, 0.5, 1.0, 1.5, 1.9] {
        let r = orlicz::not_a_ball_demo(3.0, eps, 1000, 2, SEED)?;
        let good = r.membership_valid && r.violations == 0 && r.samples == 1000 && r.inversion.residual < 1e-9 && r.passed;
        ok &= good;
        parts.push(format!("ε={eps}:{}", if good { "ok" } else { "FAIL" }));
    }
    outcome(ok, parts.join(" "))
}

fn cross_space() -> Result<Outcome> {
    let grid = parse_eps_grid("0.05:1.95:0.05")?;
    let mut mq_err = 0f64;
    for &e in &grid {
        mq_err = mq_err.max((mq_radius(e, 2.0)? - b_ball_radius(e)?).abs());
    }
    let spaces = [
        Space::Tsirelson,
        Space::Schlumprecht,
        Space::Baernstein,
        Space::Orlicz(OrliczParams::from_reduced(3.0)),
    ];
    let mut bound_violations = 0;
    let coarse = parse_eps_grid("0.1:1.9:0.1")?;
    for space in spaces {
        let curve = build_curve(space, &coarse, &CurveBudget::analytic())?;
        for s in &curve.samples {
            let floor = szlenk::universal_lower_bound(s.eps)? - 1e-12;
            bound_violations += usize::from(s.r_lower < floor || s.r_upper < floor);
        }
        bound_violations += curve.invariant_violations().len();
    }
    let x0 = SparseVec::unit(1).scale(&0.5);
    let certs = [
        tsirelson::t_membership_witness(&x0, 1.0, 2, 200)?,
        s_membership_witness(&x0, 1.0, 2)?,
        baernstein::b_membership_witness(&x0, 1.0, &Default::default())?,
        orlicz::not_a_ball_demo(3.0, 1.0, 0, 2, SEED)?.membership,
    ];
    let mut scaled_ok = 0;
    let mut scaled_total = 0;
    for cert in &certs {
        for theta in [0.25, 0.5, 0.9] {
            scaled_total += 1;
            scaled_ok += usize::from(validate_certificate(&radial_scale(cert, theta)?)?);
        }
    }
    let spaces_seen: Vec<&str> = certs.iter().map(|c| c.space.tag()).collect();
    let ok = mq_err <= 1e-15 && bound_violations == 0 && scaled_ok == scaled_total && spaces_seen.len() == 4;
    outcome(
        ok,
        format!("mq vs ball {mq_err:.1e}, bound violations {bound_violations}, radial {scaled_ok}/{scaled_total} over {spaces_seen:?}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Result<Outcome>); 11] = [
        ("Tsirelson oracle equivalence", 60, tsirelson_oracle),
        ("Tsirelson block norms m/2", 60, tsirelson_blocks),
        ("Tsirelson radius curve and witnesses", 120, tsirelson_curve),
        ("Schlumprecht flat vectors n/φ(n)", 30, schlumprecht_flat),
        ("Schlumprecht witnesses and tail bound", 120, schlumprecht_radius),
        ("Baernstein suite", 180, baernstein_suite),
        ("Orlicz closed form vs Luxemburg", 30, orlicz_closed_form),
        ("KKT minimization", 30, kkt),
        ("Claim sampling", 120, claim),
        ("Not-a-ball demo", 120, not_a_ball),
        ("Cross-space identities", 120, cross_space),
    ];
    let mut failures = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = took <= Duration::from_secs(*budget);
        let pass = pass && in_time;
        failures += usize::from(!pass);
        println!(
            "criterion {:2} {}: {name} ({:.2}s of {budget}s) {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
