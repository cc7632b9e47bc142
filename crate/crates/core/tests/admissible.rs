use std::sync::Arc;

use czk_core::admissible::*;
use czk_core::dyadic::Interval;
use proptest::prelude::*;

fn rough() -> AdmissibleTriple {
    AdmissibleTriple::new(
        "rough",
        Arc::new(|x: f64| x * (-x).exp()),
        Arc::new(|x: f64| (x.sin().abs() * x / (1.0 + x)).min(1.0)),
        Arc::new(|x: f64| (2.0 + (3.0 * x).cos()) / (1.0 + x)),
        [false; 3],
    )
}

#[test]
fn regularized_l_matches_closed_form() {
    // sup over y >= x of y e^{-y} is 1/e left of 1 and x e^{-x} right of it
    let r = regularize_monotone(&rough());
    for i in -40..=40 {
        let x = grid_point(i);
        let want = if x <= 1.0 { (-1f64).exp() } else { x * (-x).exp() };
        assert!((r.l(x) - want).abs() < 1e-15, "x = {x}");
    }
}

#[test]
fn regularization_is_idempotent_monotone_and_dominating() {
    let t = rough();
    let r = regularize_monotone(&t);
    assert_eq!(r.check_monotone(), [true; 3]);
    let rr = regularize_monotone(&r);
    assert_eq!(rr.name, r.name);
    for x in grid() {
        assert!(r.l(x) >= t.l(x) && r.s(x) >= t.s(x) && r.d(x) >= t.d(x));
        assert_eq!(rr.l(x), r.l(x));
        assert_eq!(rr.s(x), r.s(x));
        assert_eq!(rr.d(x), r.d(x));
    }
    assert!(!t.check_monotone().iter().all(|&b| b));
}

#[test]
fn builtin_triples() {
    assert!(AdmissibleTriple::builtin("power:0.5").is_ok());
    assert!(AdmissibleTriple::builtin("power:-1").is_err());
    assert!(AdmissibleTriple::builtin("cubic").is_err());
    let e = AdmissibleTriple::builtin("exp").unwrap();
    assert_eq!(e.check_monotone(), [true; 3]);
    assert!(e.l(1e6) == 0.0 && e.s(1e-6) == 0.0 && e.d(1e6) == 0.0);
    let p = AdmissibleTriple::power(1.0).unwrap();
    assert!((p.bound - 1.0).abs() < 1e-5);
    assert_eq!(AdmissibleTriple::zero().bound, 0.0);
}

#[test]
fn f_bound_examples() {
    let p = AdmissibleTriple::power(1.0).unwrap();
    let fb = FBound::new(p.clone(), p.clone(), 2);
    // I = B_1: L(1) S(1) D(1) = 1/2 · 1/2 · 1/2
    assert!((fb.f_k(&Interval::ball(1.0)) - 0.125).abs() < 1e-15);
    // I = B_4 at M = 2: L(1) S(16) D(1/2) = 1/2 · 16/17 · 2/3
    let want = 0.5 * 16.0 / 17.0 * 2.0 / 3.0;
    assert!((fb.f_w(&Interval::ball(4.0), 2) - want).abs() < 1e-15);
    let i = Interval::new(3.0, 0.5).unwrap();
    assert!((fb.f_joint(&[i], 2) - fb.f(&i, 2)).abs() < 1e-15);
    // n identical intervals scale each factor sum by n
    assert!((fb.f_joint(&[i, i], 2) - 8.0 * fb.f(&i, 2)).abs() < 1e-14);
}

#[test]
fn dilation_rescales_the_argument() {
    let e = AdmissibleTriple::exponential();
    let d = dilate_triple(&e, 2.0).unwrap();
    for x in [0.01, 0.5, 3.0, 40.0] {
        assert_eq!(d.l(x), e.l(x / 2.0));
        assert_eq!(d.s(x), e.s(x / 2.0));
        assert_eq!(d.d(x), e.d(x / 2.0));
    }
    assert!(dilate_triple(&e, 0.0).is_err());
    assert!(dilate_triple(&e, f64::INFINITY).is_err());
}

#[test]
fn f_vanishes_along_escapes() {
    let p = AdmissibleTriple::power(0.5).unwrap();
    let fb = FBound::new(p.clone(), p, 3);
    let far = |s: f64| fb.f_k(&Interval::new(s, 1.0).unwrap());
    let centered = |s: f64| fb.f_k(&Interval::new(0.0, s).unwrap());
    assert!(far(1e6) < 1e-2 * far(1.0));
    assert!(centered(1e-8) < 1e-3 * centered(1.0));
    assert!(centered(1e8) < 1e-3 * centered(1.0));
}

proptest! {
    #[test]
    fn regularized_envelopes_are_monotone_off_grid(x in 1e-20f64..1e20, f in 1.0f64..1e3) {
        let r = regularize_monotone(&rough());
        let y = x * f;
        prop_assert!(r.l(y) <= r.l(x));
        prop_assert!(r.s(y) >= r.s(x));
        prop_assert!(r.d(y) <= r.d(x));
    }
}
