use gl4k::cli::{emit_csv, parse_complex, parse_csv, Table};
use gl4k::eisenstein::{d4, hecke_levi, hecke_min, ConstantOne, DivisorProvider, EigenvalueProvider, Partition};
use gl4k::intbounds::{lhs_integral_a1, lhs_integral_a3};
use gl4k::kloosterman::{classical_kloosterman, gl4_kloosterman_bruhat, weil_bound, DEFAULT_BUDGET};
use gl4k::params::{langlands_to_spectral, permutations4, spectral_to_langlands, LanglandsParam, SpectralParam, WeylElement};
use gl4k::testfn::{f_r, f_r_s4_product};
use num_complex::Complex64 as C;
use num_integer::Integer;
use proptest::prelude::*;

fn imag3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_round_trip(re in prop::collection::vec(-1.0f64..1.0, 3), im in prop::collection::vec(-5.0f64..5.0, 3)) {
        let v: Vec<C> = re.iter().zip(&im).map(|(a, b)| C::new(*a, *b)).collect();
        let a = spectral_to_langlands(&SpectralParam::new(v.clone()).unwrap()).unwrap();
        prop_assert!(a.alpha().iter().sum::<C>().norm() < 1e-12);
        let back = langlands_to_spectral(&a).unwrap();
        for (x, y) in back.v.iter().zip(&v) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn f_r_is_weyl_invariant(t in imag3(), r in 0.5f64..4.0) {
        let a = LanglandsParam::imaginary(&t).unwrap();
        let base = f_r(&a, r).unwrap();
        prop_assert!(base >= 1.0);
        for p in permutations4() {
            let q = f_r(&a.permuted(&p), r).unwrap();
            prop_assert!((q - base).abs() <= 1e-12 * base);
        }
        let prod = f_r_s4_product(&a, r);
        prop_assert!((prod.re - base).abs() <= 1e-10 * base && prod.im.abs() <= 1e-10 * base);
    }

    #[test]
    fn classical_sum_symmetries(m in 1i64..60, n in 1i64..60, c in 1i64..80, a in 1i64..40) {
        let s = classical_kloosterman(m, n, c);
        prop_assert!((s - classical_kloosterman(n, m, c)).abs() < 1e-9);
        prop_assert!(s.abs() <= weil_bound(m, n, c) + 1e-9);
        if a.gcd(&c) == 1 {
            prop_assert!((classical_kloosterman(a * m, n, c) - classical_kloosterman(m, a * n, c)).abs() < 1e-9);
        }
    }

    #[test]
    fn hecke_multiplicative_and_bounded(t in imag3(), m in 1u64..200, n in 1u64..200) {
        let a = LanglandsParam::imaginary(&t).unwrap();
        let lm = hecke_min(m, &a).unwrap();
        prop_assert!(lm.norm() <= d4(m) as f64 * (1.0 + 1e-12));
        if m.gcd(&n) == 1 {
            let lmn = hecke_min(m * n, &a).unwrap();
            let ln = hecke_min(n, &a).unwrap();
            prop_assert!((lmn - lm * ln).norm() <= 1e-11 * d4(m * n) as f64);
        }
    }

    #[test]
    fn minimal_parabolic_row_agrees(t in imag3(), m in 1u64..500) {
        // the (1,1,1,1) row with trivial providers is the direct divisor sum
        let s: Vec<C> = t.iter().map(|x| C::new(0.0, *x)).collect();
        let alpha = spectral_to_langlands(&SpectralParam::new(s.clone()).unwrap()).unwrap();
        let one = ConstantOne;
        let p: Vec<&dyn EigenvalueProvider> = vec![&one; Partition::P1111.providers_needed()];
        let via_levi = hecke_levi(Partition::P1111, m, &s, &p).unwrap();
        prop_assert!((via_levi - hecke_min(m, &alpha).unwrap()).norm() <= 1e-11 * d4(m) as f64);
    }

    #[test]
    fn divisor_provider_is_multiplicative(v in -3.0f64..3.0, m in 1u64..300, n in 1u64..300) {
        let p = DivisorProvider { v: C::new(0.0, v) };
        if m.gcd(&n) == 1 {
            let d = p.lambda(m * n).unwrap() - p.lambda(m).unwrap() * p.lambda(n).unwrap();
            prop_assert!(d.norm() < 1e-10);
        }
    }

    #[test]
    fn a1_integral_symmetric_in_exponents(e in -1.0f64..3.0, f in -1.0f64..3.0, t in 1.0f64..1e4) {
        let (x, ex) = lhs_integral_a1(e, f, t).unwrap();
        let (y, ey) = lhs_integral_a1(f, e, t).unwrap();
        prop_assert!((x - y).abs() <= 1e-9 * x.abs() + 10.0 * (ex + ey));
    }

    #[test]
    fn a3_integral_additive_over_windows(
        gaps in prop::collection::vec(0.0f64..50.0, 4),
        e in prop::collection::vec(-1.0f64..2.0, 5),
        cut in 2usize..5,
    ) {
        let mut b = vec![0.0];
        for g in &gaps {
            b.push(b.last().unwrap() + g);
        }
        let (whole, err) = lhs_integral_a3(&b, &e, (1, 5));
        let (left, e1) = lhs_integral_a3(&b, &e, (1, cut));
        let (right, e2) = lhs_integral_a3(&b, &e, (cut, 5));
        prop_assert!((whole - left - right).abs() <= 1e-9 * whole.abs() + 10.0 * (err + e1 + e2));
    }

    #[test]
    fn csv_round_trips(rows in prop::collection::vec(prop::collection::vec(-1e300f64..1e300, 3), 0..8)) {
        let t = Table { header: vec!["a".into(), "b".into(), "c".into()], rows };
        prop_assert_eq!(parse_csv(&emit_csv(&t)).unwrap(), t);
    }

    #[test]
    fn complex_text_round_trips(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        let text = format!("{re:e}{im:+e}i");
        prop_assert_eq!(parse_complex(&text).unwrap(), C::new(re, im));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gl4_sum_trivially_bounded(
        c in prop::collection::vec(1i64..4, 3),
        l in prop::collection::vec(-3i64..4, 3),
        m in prop::collection::vec(-3i64..4, 3),
        label in 1u8..=8,
    ) {
        let w = WeylElement::new(label).unwrap();
        let c = [c[0], c[1], c[2]];
        let s = gl4_kloosterman_bruhat([l[0], l[1], l[2]], [m[0], m[1], m[2]], c, &w, [1; 4], DEFAULT_BUDGET);
        if let Ok(s) = s {
            prop_assert!(s.trivial_bound_ok);
            prop_assert!(s.value.norm() <= (c[0] * c[1] * c[2]) as f64 + 1e-9);
        }
    }
}

#[test]
fn identity_cell_is_one() {
    let w = WeylElement::parse("w1").unwrap();
    let s = gl4_kloosterman_bruhat([1, 2, 3], [1, 2, 3], [1, 1, 1], &w, [1; 4], DEFAULT_BUDGET).unwrap();
    assert!((s.value - C::new(1.0, 0.0)).norm() < 1e-15);
    assert_eq!(s.cells, 1);
}
