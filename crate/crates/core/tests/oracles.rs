//! Reference values: closed forms where they exist, otherwise outputs frozen
//! once the independent cross-checks agreed.

use gl4k::eisenstein::{d4, hecke_min};
use gl4k::kloosterman::{classical_kloosterman, gl4_kloosterman_bruhat, DEFAULT_BUDGET};
use gl4k::params::{LanglandsParam, WeylElement};
use gl4k::special::lgamma;
use gl4k::testfn::{main_term_integral, MainTermQuad, TestParams};
use gl4k::verify::classical_oracle;
use gl4k::whittaker::mellin;
use gl4k::zeroset::enumerate_signs;
use num_complex::Complex64 as C;
use std::f64::consts::PI;

#[test]
fn log_gamma_closed_forms() {
    let g = |x: f64, y: f64| lgamma(C::new(x, y));
    assert!((g(0.5, 0.0).re - 0.5 * PI.ln()).abs() < 1e-14);
    assert!((g(5.0, 0.0).re - 24f64.ln()).abs() < 1e-14);
    // |Γ(1/2 + it)|² = π / cosh(πt)
    let t = 3.7;
    assert!((2.0 * g(0.5, t).re - (PI / (PI * t).cosh()).ln()).abs() < 1e-12);
}

#[test]
fn classical_sums_closed_forms() {
    assert!((classical_kloosterman(1, 1, 3) + 1.0).abs() < 1e-12);
    assert!((classical_kloosterman(1, 1, 5) - (2.0 + 2.0 * (4.0 * PI / 5.0).cos())).abs() < 1e-12);
    // Ramanujan sum: S(m, 0; p) = −1 for p ∤ m
    assert!((classical_kloosterman(3, 0, 7) + 1.0).abs() < 1e-12);
    for c in 1..40 {
        assert!((classical_kloosterman(2, 5, c) - classical_oracle(2, 5, c)).abs() < 1e-9);
    }
}

#[test]
fn hecke_at_zero_is_d4() {
    let a = LanglandsParam::imaginary(&[0.0, 0.0, 0.0]).unwrap();
    for m in 1..300u64 {
        assert!((hecke_min(m, &a).unwrap() - C::new(d4(m) as f64, 0.0)).norm() < 1e-9);
    }
    assert_eq!([d4(1), d4(2), d4(4), d4(6), d4(12)], [1, 4, 10, 16, 40]);
}

#[test]
fn zero_set_counts() {
    let en = enumerate_signs();
    assert_eq!(en.total, 1 << 14);
    assert_eq!(en.survivors.len(), 3);
}

#[test]
fn frozen_gl4_sums() {
    let w = |k: &str| WeylElement::parse(k).unwrap();
    let s = gl4_kloosterman_bruhat([1, 1, 1], [1, 1, 1], [2, 2, 2], &w("w8"), [1; 4], DEFAULT_BUDGET).unwrap();
    assert_eq!(s.cells, 9);
    assert!((s.value - C::new(-3.0, 0.0)).norm() < 1e-12);
    let s = gl4_kloosterman_bruhat([1, 2, 1], [1, 1, 1], [3, 3, 3], &w("w8"), [1; 4], DEFAULT_BUDGET).unwrap();
    assert_eq!(s.cells, 50);
    assert!((s.value - C::new(-4.0, 0.0)).norm() < 1e-12);
    let s = gl4_kloosterman_bruhat([1, 1, 1], [1, 1, 1], [2, 3, 2], &w("w4"), [1; 4], DEFAULT_BUDGET).unwrap();
    assert!(!s.compatible);
    assert_eq!(s.value, C::new(0.0, 0.0));
}

#[test]
fn frozen_mellin_value() {
    let a = LanglandsParam::imaginary(&[0.1, 0.3, -0.2]).unwrap();
    let v = mellin(&a, [C::new(0.5, 0.0); 3]).unwrap();
    assert!((v.value - C::new(1.017190185012873e4, 0.0)).norm() < 1e-8 * 1e4);
}

#[test]
fn frozen_main_term() {
    let q = MainTermQuad::default();
    let r = main_term_integral(&TestParams::new(8.0, 1.0).unwrap(), &q).unwrap();
    assert!((r.value / 2.9212179730250534e17 - 1.0).abs() < 1e-8);
}
