use czk_core::bumps::SampledFunction;
use czk_core::dyadic::{is_lagom, DyadicInterval, LagomWindow};
use czk_core::exec::Sequential;
use czk_core::wavelets::*;
use proptest::prelude::*;

fn basis() -> WaveletBasis {
    WaveletBasis::new(BasisParams::default()).unwrap()
}

fn small_window() -> LagomWindow {
    LagomWindow::new(2, 1.0, -1, 2).unwrap()
}

#[test]
fn db2_filter_closed_form() {
    let s3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    let want = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
    let h = daubechies_filter(2).unwrap();
    let rev: Vec<f64> = want.iter().rev().copied().collect();
    let close = |w: &[f64]| h.iter().zip(w).all(|(a, b)| (a - b).abs() < 1e-14);
    assert!(close(&want) || close(&rev), "{h:?}");
}

#[test]
fn filters_have_vanishing_moments() {
    for n in 1..=8usize {
        let h = daubechies_filter(n).unwrap();
        assert_eq!(h.len(), 2 * n);
        assert!((h.iter().sum::<f64>() - 2f64.sqrt()).abs() < 1e-12);
        for m in 0..n as i32 {
            // high-pass moments Σ (-1)^k k^m h_k vanish
            let s: f64 = h.iter().enumerate().map(|(k, v)| if k % 2 == 0 { 1.0 } else { -1.0 } * (k as f64).powi(m) * v).sum();
            assert!(s.abs() < 1e-9 * 10f64.powi(m), "n = {n}, m = {m}: {s}");
        }
    }
    assert!(daubechies_filter(0).is_err());
}

#[test]
fn basis_parameters_are_validated() {
    let p = BasisParams::default();
    assert!(WaveletBasis::new(BasisParams { table_level: 2, ..p }).is_err());
    assert!(WaveletBasis::new(BasisParams { coeff_level: 14, ..p }).is_err());
    assert!(WaveletBasis::new(BasisParams { tau_orth: 0.0, ..p }).is_err());
}

#[test]
fn mother_wavelet_is_normalized_with_vanishing_moments() {
    let b = basis();
    let psi = b.mother();
    assert!((psi.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-9);
    let (lo, hi) = psi.support.unwrap();
    assert_eq!(hi - lo, 2.0 * b.half_support());
    // trapezoid on the table nodes
    let h = 2f64.powi(-12);
    let n = ((hi - lo) / h).round() as i64;
    for m in 0..6 {
        let s: f64 = (0..=n).map(|i| {
            let x = lo + i as f64 * h;
            psi.value(x) * x.powi(m)
        }).sum::<f64>() * h;
        assert!(s.abs() < 1e-8 * 6f64.powi(m), "moment {m}: {s}");
    }
}

#[test]
fn coefficient_examples() {
    let b = basis();
    let i = DyadicInterval::new(1, -1);
    assert!((b.coeff(&b.psi(&i), &i).unwrap() - 1.0).abs() < 1e-6);
    for j in [DyadicInterval::new(1, 0), DyadicInterval::new(0, -1), DyadicInterval::new(2, -2)] {
        assert!(b.coeff(&b.psi(&i), &j).unwrap().abs() < 1e-6, "{j:?}");
    }
    // a quintic is annihilated
    let quintic = SampledFunction::from_fn(
        |x, out: &mut [f64]| {
            out.fill(0.0);
            out[0] = 1.0 - 2.0 * x + 0.5 * x.powi(5);
        },
        0,
        None,
        1.0,
    );
    for i in [DyadicInterval::new(0, 3), DyadicInterval::new(-2, -1), DyadicInterval::new(3, 10)] {
        let scale = 1.0 + 0.5 * b.support(&i).1.abs().max(b.support(&i).0.abs()).powi(5);
        assert!(b.coeff(&quintic, &i).unwrap().abs() < 1e-9 * scale, "{i:?}");
    }
}

#[test]
fn fast_paths_agree_with_function_handles() {
    let b = basis();
    for i in [DyadicInterval::new(0, 0), DyadicInterval::new(-3, 2), DyadicInterval::new(4, -7)] {
        let (psi, phi) = (b.psi(&i), b.phi(&i));
        let (lo, hi) = b.support(&i);
        for n in 0..=40 {
            let x = lo + (hi - lo) * n as f64 / 40.0 + 1e-3 * i.length();
            assert!((psi.value(x) - b.psi_value(&i, x)).abs() < 1e-12 / i.length().sqrt());
            assert!((phi.value(x) - b.phi_value(&i, x)).abs() < 1e-12 / i.length());
        }
        let (a, c) = (i.center() - i.length(), i.center() + i.length());
        assert!((phi.integral_over(a, c) - 1.0).abs() < 1e-12);
    }
}

/// Hilbert transform of ψ_I by a singularity-subtracted midpoint rule.
fn hilbert_oracle(b: &WaveletBasis, i: &DyadicInterval, x: f64) -> f64 {
    let (lo, hi) = b.support(i);
    let cells = 1 << 18;
    let h = (hi - lo) / cells as f64;
    let px = b.psi_value(i, x);
    let mut acc = 0.0;
    for c in 0..cells {
        let s = lo + (c as f64 + 0.5) * h;
        acc += (b.psi_value(i, s) - px) / (s - x);
    }
    acc * h + px * ((hi - x) / (lo - x)).abs().ln()
}

#[test]
fn tabulated_hilbert_converges_to_quadrature() {
    let i = DyadicInterval::new(1, 3);
    let coarse = basis();
    let fine = WaveletBasis::new(BasisParams { hilbert_level: 11, ..BasisParams::default() }).unwrap();
    let (mut e_coarse, mut e_fine) = (0.0f64, 0.0f64);
    for x in [-3.0, 0.0, 1.6, 1.75, 1.9, 2.2, 3.1, 5.5] {
        let want = hilbert_oracle(&coarse, &i, x);
        e_coarse = e_coarse.max((coarse.hilbert_psi(&i, x) - want).abs());
        e_fine = e_fine.max((fine.hilbert_psi(&i, x) - want).abs());
    }
    assert!(e_coarse < 1e-4, "{e_coarse}");
    assert!(e_fine < 0.25 * e_coarse, "{e_fine} vs {e_coarse}");
}

#[test]
fn small_window_gram_is_orthonormal() {
    let g = basis().gram_deviation(&small_window(), &Sequential).unwrap();
    assert!(g < 1e-6, "{g}");
}

#[test]
fn projections_partition_the_window() {
    let w = small_window();
    let c: CoefficientMap = w.intervals().unwrap().into_iter().enumerate().map(|(n, i)| (i, n as f64 + 1.0)).collect();
    let p = project_lagom(&c, 2, false).unwrap();
    let q = project_lagom(&c, 2, true).unwrap();
    assert_eq!(p.len() + q.len(), c.len());
    assert_eq!(p.add(&q), c);
    assert!(p.keys().all(|i| is_lagom(&i.interval(), 2)));
    assert!(project_lagom(&c, 0, false).is_err());
}

fn arb_map() -> impl Strategy<Value = CoefficientMap> {
    proptest::collection::vec((-3i32..4, -20i64..20, -5.0f64..5.0), 0..40)
        .prop_map(|v| v.into_iter().map(|(j, k, x)| (DyadicInterval::new(j, k), x)).collect())
}

proptest! {
    #[test]
    fn lagom_projection_is_an_orthogonal_projection(c in arb_map(), d in arb_map(), m in 1u32..5) {
        let pc = project_lagom(&c, m, false).unwrap();
        prop_assert_eq!(project_lagom(&pc, m, false).unwrap(), pc.clone());
        prop_assert!(project_lagom(&pc, m, true).unwrap().is_empty());
        let pd = project_lagom(&d, m, false).unwrap();
        prop_assert!((pc.dot(&d) - c.dot(&pd)).abs() < 1e-12 * (1.0 + c.l2_norm() * d.l2_norm()));
    }

    #[test]
    fn map_algebra(c in arb_map(), s in -3.0f64..3.0) {
        prop_assert!((c.scaled(s).l2_norm() - s.abs() * c.l2_norm()).abs() < 1e-12 * (1.0 + c.l2_norm()));
        prop_assert!((c.dot(&c) - c.l2_norm().powi(2)).abs() < 1e-10 * (1.0 + c.dot(&c)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]
    #[test]
    fn analysis_inverts_synthesis(seed in proptest::collection::vec(-1.0f64..1.0, 12)) {
        let b = basis();
        let w = small_window();
        let ivs = w.intervals().unwrap();
        let c: CoefficientMap = ivs.iter().zip(seed.iter().cycle()).step_by(3).map(|(i, v)| (*i, *v)).collect();
        let back = b.analyze(&b.synthesize(&c), &w, &Sequential).unwrap();
        for i in &ivs {
            prop_assert!((back.get(i) - c.get(i)).abs() < 1e-6, "{:?}: {} vs {}", i, back.get(i), c.get(i));
        }
    }
}
