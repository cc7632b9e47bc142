use czk_core::bumps::*;
use czk_core::dyadic::Interval;
use proptest::prelude::*;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn iv(c: f64, l: f64) -> Interval {
    Interval::new(c, l).unwrap()
}

#[test]
fn translate_dilate_normalizations() {
    let f = cutoff();
    for p in [1.0, 2.0, 4.0] {
        let g = f.translate_dilate(3.0, 0.25, p).unwrap();
        assert!((g.value(3.0 + 0.25 * 1.5) - 0.25f64.powf(-1.0 / p) * f.value(1.5)).abs() < 1e-15);
        let (nf, ng) = (f.lp_norm(p).unwrap(), g.lp_norm(p).unwrap());
        assert!((nf - ng).abs() < 1e-9 * nf, "p = {p}: {nf} vs {ng}");
    }
    let g = f.translate_dilate(-1.0, 8.0, f64::INFINITY).unwrap();
    assert_eq!(g.support, Some((-17.0, 15.0)));
    assert_eq!(g.lp_norm(f64::INFINITY).unwrap(), 1.0);
    assert!(f.translate_dilate(0.0, 0.0, 2.0).is_err());
    assert!(f.translate_dilate(0.0, 1.0, 0.0).is_err());
}

#[test]
fn derivatives_match_finite_differences() {
    let f = cutoff().translate_dilate(0.5, 3.0, 2.0).unwrap().mul(&gaussian());
    let h = 1e-5;
    for x in [-4.1, -2.0, 0.9, 3.3, 5.8] {
        for n in 0..4 {
            let fd = (f.derivative(n, x + h).unwrap() - f.derivative(n, x - h).unwrap()) / (2.0 * h);
            let exact = f.derivative(n + 1, x).unwrap();
            assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "n = {n}, x = {x}");
        }
    }
}

#[test]
fn cutoff_hilbert_transform_against_quadrature() {
    let tabled = cutoff_with_hilbert();
    let adaptive = cutoff();
    // off the support the principal value is an ordinary integral
    for x in [2.5, 5.0, -9.0] {
        let want = simpson(|s| cutoff_value(s) / (s - x), -2.0, 2.0, 20_000);
        assert!((tabled.hilbert(x).unwrap() - want).abs() < 1e-8, "x = {x}");
        assert!((adaptive.hilbert(x).unwrap() - want).abs() < 1e-9, "x = {x}");
    }
    for x in [0.0, 0.3, 1.5, -1.9] {
        let (a, b) = (tabled.hilbert(x).unwrap(), adaptive.hilbert(x).unwrap());
        assert!((a - b).abs() < 1e-7, "x = {x}: {a} vs {b}");
    }
    assert!(tabled.hilbert(0.0).unwrap().abs() < 1e-12);
}

#[test]
fn adaptedness_is_invariant_under_translation_dilation() {
    let f = cutoff().mul(&gaussian());
    let i = iv(0.0, 1.0);
    for (a, lambda) in [(3.0, 0.125), (-40.0, 16.0), (0.5, 1.0)] {
        for p in [1.0, 2.0, f64::INFINITY] {
            let g = f.translate_dilate(a, lambda, p).unwrap();
            let ci = adaptedness_constant(&f, &i, p, 4).unwrap();
            let cj = adaptedness_constant(&g, &iv(a, lambda), p, 4).unwrap();
            assert!((ci - cj).abs() < 1e-12 * ci, "a = {a}, λ = {lambda}, p = {p}: {ci} vs {cj}");
        }
    }
}

#[test]
fn adaptedness_sees_missing_decay() {
    let line = czk_core::bumps::SampledFunction::from_fn(
        |x, out: &mut [f64]| {
            out.fill(0.0);
            out[0] = x;
            if out.len() > 1 {
                out[1] = 1.0;
            }
        },
        4,
        None,
        1.0,
    );
    let i = iv(0.0, 1.0);
    let small = adaptedness_constant_on(&line, &i, 2.0, 2, AdaptednessGrid { radius: 16.0, per_unit: 16 }).unwrap();
    let large = adaptedness_constant_on(&line, &i, 2.0, 2, AdaptednessGrid { radius: 256.0, per_unit: 16 }).unwrap();
    assert!(large > 100.0 * small);
    assert!(adaptedness_constant(&cutoff(), &i, 2.0, 20).is_err());
}

#[test]
fn cutoff_constructions() {
    let f = gaussian();
    let (i, j) = (iv(0.0, 1.0), iv(2.0, 1.0));
    let inner = inner_cutoff(&f, &i, &j, 2.0).unwrap();
    assert_eq!(inner.value(2.0), f.value(2.0));
    assert_eq!(inner.value(10.0), 0.0);
    assert!(inner_cutoff(&f, &i, &iv(0.0, 0.5), 2.0).is_err());
    assert!((inner_cutoff_bound(3.0, 1.0, 4) - 48.0).abs() < 1e-12);

    let small = iv(40.0, 0.25);
    let outer = outer_cutoff(&f, &i, &small, 0.5).unwrap();
    let lambda = outer_cutoff_lambda(&i, &small, 0.5);
    assert!((lambda - (40.625f64 / 0.25).sqrt() / 32.0).abs() < 1e-12);
    assert_eq!(outer.value(40.0), 0.0);
    assert_eq!(outer.value(0.1), f.value(0.1));
    assert!(outer_cutoff(&f, &small, &i, 0.5).is_err());
    assert!(outer_cutoff(&f, &i, &small, 1.0).is_err());
    assert!((outer_cutoff_gain(&i, &iv(0.0, 0.25), 0.5, 4) - 0.5).abs() < 1e-15);
}

#[test]
fn plateau_and_moment_bumps() {
    let (i, j) = (iv(0.0, 1.0), iv(5.0, 0.25));
    let lmin = plateau_min_lambda(&i, &j, 0.5, 3.0);
    assert!(plateau_bump(&i, &j, 0.5, 0.5 * lmin).is_err());
    let p = plateau_bump(&i, &j, 0.5, lmin).unwrap();
    assert!((p.value(5.0) - 1.0 / (lmin * 0.25).sqrt()).abs() < 1e-15);
    // ∫ Φ_J² / |λJ| = ∫ Φ² = 2 + 2∫_1^2 Φ²
    let phi2 = 2.0 + 2.0 * simpson(|s| cutoff_value(s).powi(2), 1.0, 2.0, 4000);
    assert!((p.lp_norm(2.0).unwrap().powi(2) - phi2).abs() < 1e-8);

    let m0 = moment_bump(&j, 0);
    let c = cutoff_on(&j);
    for x in [4.6, 4.9, 5.2, 5.45] {
        assert!((m0.value(x) - 2.0 * c.value(x)).abs() < 1e-14);
    }
    let m1 = moment_bump(&j, 1);
    assert!((m1.value(5.3) + m1.value(4.7)).abs() < 1e-15);
    assert_eq!(moment_bound(&iv(0.0, 0.5), 2), 64.0 * 2.0 * 0.25);
}

#[test]
fn recentering_constant() {
    assert!((recenter_constant(&iv(0.0, 1.0), &iv(0.0, 0.25), 1).unwrap() - 8.0).abs() < 1e-12);
    assert!(recenter_constant(&iv(0.0, 1.0), &iv(0.1, 0.25), 1).is_err());
}

#[test]
fn pairing_and_mean_zero_projection() {
    let c = cutoff();
    let self_pair = pairing(&c, &c, 10).unwrap();
    let phi2 = 2.0 + 2.0 * simpson(|s| cutoff_value(s).powi(2), 1.0, 2.0, 4000);
    assert!((self_pair - phi2).abs() < 1e-10, "{self_pair} vs {phi2}");
    assert_eq!(pairing(&c, &c.translate_dilate(10.0, 1.0, 2.0).unwrap(), 4).unwrap(), 0.0);

    let w = iv(1.0, 2.0);
    let f = gaussian().mul(&cutoff_on(&iv(0.0, 4.0)));
    let g = mean_zero_projection(&f, &w);
    assert!(g.integral_over(w.left(), w.right()).abs() < 1e-12);
    assert_eq!(g.value(-6.0), f.value(-6.0));
}

#[test]
fn pair_decay_shapes() {
    let (i, j) = (iv(0.0, 1.0), iv(7.5, 0.25));
    let r = 8.125f64;
    assert!((pair_decay_shape(&i, &j, false, 3).unwrap() - 0.5 / r.powi(3)).abs() < 1e-15);
    assert!((pair_decay_shape(&i, &j, true, 3).unwrap() - 0.125 / r.powi(2)).abs() < 1e-15);
    assert!(pair_decay_shape(&j, &i, true, 3).is_err());
}

proptest! {
    #[test]
    fn cutoff_is_even_and_bounded(x in -3.0f64..3.0) {
        let v = cutoff_value(x);
        prop_assert_eq!(v, cutoff_value(-x));
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn translate_dilate_composes(a in -10.0f64..10.0, l1 in 0.1f64..10.0, b in -10.0f64..10.0, l2 in 0.1f64..10.0, x in -50.0f64..50.0) {
        let f = gaussian();
        let twice = f.translate_dilate(a, l1, 2.0).unwrap().translate_dilate(b, l2, 2.0).unwrap();
        let once = f.translate_dilate(b + l2 * a, l1 * l2, 2.0).unwrap();
        prop_assert!((twice.value(x) - once.value(x)).abs() < 1e-12);
    }
}
