use proptest::prelude::*;

use szlenk_lab::baernstein::{b_norm, b_norm_exact, b_norm_interval, partlemma_check};
use szlenk_lab::orlicz::{closed_form_norm, luxemburg_oracle, OrliczParams};
use szlenk_lab::schlumprecht::{s_norm, s_norm_oracle};
use szlenk_lab::szlenk::{certify, radial_scale, validate_certificate, CertifyOptions};
use szlenk_lab::tsirelson::{t_norm, t_norm_exact, t_norm_oracle};
use szlenk_lab::vecspace::parse_vec_json;
use szlenk_lab::{DerivationCertificate, Space, SparseVec};

fn sparse(horizon: usize, max_support: usize) -> impl Strategy<Value = SparseVec> {
    prop::collection::btree_map(1..=horizon, (0.05f64..3.0, any::<bool>()), 1..=max_support).prop_map(|m| {
        SparseVec::from_pairs(m.into_iter().map(|(i, (x, neg))| (i, if neg { -x } else { x }))).unwrap()
    })
}

fn orlicz() -> impl Strategy<Value = OrliczParams> {
    (0.01f64..10.0, 0.01f64..10.0).prop_map(|(a, b)| OrliczParams::new(a, b).unwrap())
}

fn all_spaces(p: OrliczParams) -> [Space; 4] {
    [Space::Tsirelson, Space::Schlumprecht, Space::Baernstein, Space::Orlicz(p)]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_and_homogeneity(u in sparse(14, 7), v in sparse(14, 7), c in -4.0f64..4.0, p in orlicz()) {
        for space in all_spaces(p) {
            let (nu, nv) = (space.norm(&u), space.norm(&v));
            prop_assert!(space.norm(&u.add(&v)) <= nu + nv + 1e-9, "{space}");
            prop_assert!(close(space.norm(&u.scale(&c)), c.abs() * nu), "{space}");
        }
    }

    #[test]
    fn unconditional_and_monotone(v in sparse(14, 8), flips in prop::collection::vec(any::<bool>(), 8), cut in 1usize..15, p in orlicz()) {
        let signed = SparseVec::from_pairs(v.iter().zip(&flips).map(|((i, x), f)| (*i, if *f { -*x } else { *x }))).unwrap();
        for space in all_spaces(p) {
            let n = space.norm(&v);
            prop_assert!(close(space.norm(&signed), n), "{space}");
            prop_assert!(space.norm(&v.head_proj(cut)) <= n + 1e-9, "{space}");
            prop_assert!(space.norm(&v.tail_proj(cut)) <= n + 1e-9, "{space}");
        }
    }

    #[test]
    fn between_sup_and_l1(v in sparse(14, 8)) {
        let (sup, l1) = (v.abs().max_abs(), v.l1());
        for n in [t_norm(&v).value, s_norm(&v).value, b_norm(&v).value] {
            prop_assert!(sup <= n + 1e-12 && n <= l1 + 1e-12);
        }
    }

    #[test]
    fn implicit_norms_match_oracles(v in sparse(11, 7)) {
        prop_assert!(close(t_norm(&v).value, t_norm_oracle(&v, 9).unwrap()));
        prop_assert!(close(s_norm(&v).value, s_norm_oracle(&v, 9).unwrap()));
        let exact = v.to_rational();
        prop_assert_eq!(t_norm_exact(&exact).value, t_norm_oracle(&exact, 9).unwrap());
    }

    #[test]
    fn witnesses_are_sound(v in sparse(20, 10)) {
        prop_assert!(t_norm(&v).witness_is_sound(&v, 1e-9));
        prop_assert!(s_norm(&v).witness_is_sound(&v, 1e-9));
        prop_assert!(b_norm(&v).witness_is_sound(&v, 1e-9));
        let exact = v.to_rational();
        prop_assert!(t_norm_exact(&exact).witness_is_sound(&exact));
    }

    #[test]
    fn spreading(v in sparse(10, 6), shifts in prop::collection::vec(0usize..4, 6)) {
        let mut moved = Vec::new();
        let mut last = 0;
        for (k, (i, _)) in v.iter().enumerate() {
            last = (*i + shifts[k]).max(last + 1);
            moved.push(last);
        }
        let w = v.respread(&moved).unwrap();
        prop_assert!(t_norm(&v).value <= t_norm(&w).value + 1e-12);
        prop_assert!(b_norm(&v).value <= b_norm(&w).value + 1e-12);
        prop_assert!(close(s_norm(&v).value, s_norm(&w).value));
    }

    #[test]
    fn baernstein_engines_agree(v in sparse(18, 11)) {
        let exact = b_norm_exact(&v, 14).unwrap().value;
        prop_assert!(close(b_norm(&v).value, exact));
        prop_assert!(b_norm_interval(&v).value <= exact + 1e-12);
    }

    #[test]
    fn baernstein_partition_lemma(v in sparse(16, 10), n in 0usize..18) {
        prop_assert!(partlemma_check(&v, n, 14, 1e-12).unwrap());
    }

    #[test]
    fn orlicz_closed_form_solves_luxemburg(v in sparse(30, 12), p in orlicz()) {
        let (closed, oracle) = (closed_form_norm(&v, &p), luxemburg_oracle(&v, &p).unwrap());
        prop_assert!((closed - oracle).abs() < 1e-10 * closed.max(1.0));
        let f = 2.0 * closed * closed;
        let s2 = v.l2().powi(2);
        prop_assert!(p.b * s2 <= f * (1.0 + 1e-12));
        prop_assert!(f <= (p.b + (p.b * p.b + 4.0 * p.a).sqrt()) * s2 * (1.0 + 1e-12));
    }

    #[test]
    fn json_round_trip(v in sparse(50, 10)) {
        let text = serde_json::to_string(&v).unwrap();
        prop_assert_eq!(parse_vec_json(&text).unwrap(), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certificates_validate_scale_and_round_trip(
        r in 0.05f64..0.45,
        eps in 0.2f64..1.0,
        t1 in 0.1f64..1.0,
        t2 in 0.1f64..1.0,
        which in 0usize..4,
    ) {
        let space = all_spaces(OrliczParams::new(1.0, 1.0).unwrap())[which];
        let x0 = SparseVec::unit(1).scale(&r);
        let cert = certify(space, &x0, eps, &CertifyOptions::default()).unwrap();
        prop_assert!(validate_certificate(&cert).unwrap());
        let back: DerivationCertificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
        prop_assert!(validate_certificate(&back).unwrap());
        let twice = radial_scale(&radial_scale(&cert, t1).unwrap(), t2).unwrap();
        prop_assert!(validate_certificate(&twice).unwrap());
        let once = radial_scale(&cert, t1 * t2).unwrap();
        prop_assert!(validate_certificate(&once).unwrap());
        for ((a, b), (c, d)) in twice.point.iter().zip(once.point.iter()) {
            prop_assert_eq!(a, c);
            prop_assert!((b - d).abs() <= 1e-15);
        }
    }
}
