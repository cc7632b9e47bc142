use std::sync::Arc;

use czk_core::admissible::{AdmissibleTriple, FBound};
use czk_core::bumps::{cutoff_on, SampledFunction};
use czk_core::dyadic::{DyadicInterval, Interval, LagomWindow};
use czk_core::exec::Sequential;
use czk_core::kernels::{builtin_kernel, CzKernel, FnKernel, SingularityClass};
use czk_core::operators::*;
use czk_core::wavelets::{BasisParams, WaveletBasis};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn basis() -> WaveletBasis {
    WaveletBasis::new(BasisParams::default()).unwrap()
}

fn small_window() -> LagomWindow {
    LagomWindow::new(2, 1.0, -1, 2).unwrap()
}

fn matrix(n: usize, values: Vec<f64>) -> CoefficientMatrix {
    let ivs = (0..n as i64).map(|k| DyadicInterval::new(0, k)).collect();
    let mut a = CoefficientMatrix::zeros(ivs, "test", "");
    a.values = values;
    a
}

/// Largest singular value of the columns `cols` by nalgebra's SVD.
fn svd_norm(a: &CoefficientMatrix, cols: &[usize]) -> f64 {
    let n = a.n();
    let m = DMatrix::from_fn(n, cols.len(), |r, c| a.get(r, cols[c]));
    m.singular_values().iter().fold(0.0, |x: f64, v| x.max(*v))
}

fn assembled(k: &CzKernel, q: &QuadratureSpec) -> CoefficientMatrix {
    assemble(k, &basis(), &small_window(), q, &Sequential).unwrap()
}

proptest! {
    #[test]
    fn operator_norm_matches_svd(n in 1usize..14, seed in proptest::collection::vec(-10.0f64..10.0, 196)) {
        let a = matrix(n, seed[..n * n].to_vec());
        let all: Vec<usize> = (0..n).collect();
        let want = svd_norm(&a, &all);
        let got = op_norm(&a).unwrap();
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn clustered_spectra_are_resolved(n in 2usize..12, eps in 1e-9f64..1e-3) {
        // orthogonal-ish matrix with all singular values near 1, top one 1 + eps
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + (i + 1) % n] = if i == 0 { 1.0 + eps } else { 1.0 };
        }
        let got = op_norm(&matrix(n, v)).unwrap();
        prop_assert!((got - (1.0 + eps)).abs() < 1e-14);
    }

    #[test]
    fn richardson_limit_is_exact_on_geometric_tables(limit in -5.0f64..5.0, c in -3.0f64..3.0, delta in 0.2f64..1.0) {
        let table: Vec<T1Value> = (2..8).map(|k| T1Value { k, value: limit + c * 2f64.powf(-k as f64 * delta), error_bound: 0.0 }).collect();
        let l = t1_limit(&table, delta).unwrap();
        prop_assert!((l - limit).abs() < 1e-12);
        if c != 0.0 {
            prop_assert!((t1_decay_slope(&table).unwrap() + delta * 2f64.ln()).abs() < 1e-9);
        }
    }
}

#[test]
fn tail_norm_restricts_columns() {
    let w = small_window();
    let ivs = w.intervals().unwrap();
    let n = ivs.len();
    let mut a = CoefficientMatrix::zeros(ivs, "test", "");
    for (idx, v) in a.values.iter_mut().enumerate() {
        *v = ((idx * 37 % 101) as f64 - 50.0) / 17.0;
    }
    // the finest scale falls outside D_1; at M = 2 every interval is lagom
    let cols = a.tail_columns(1);
    assert!(!cols.is_empty() && cols.len() < n);
    let got = tail_norm(&a, 1).unwrap();
    assert!((got - svd_norm(&a, &cols)).abs() < 1e-12 * got.max(1.0));
    assert!(a.tail_columns(2).is_empty());
    assert_eq!(tail_norm(&a, 2).unwrap(), 0.0);
    assert!(tail_norm(&a, 0).is_err());
    let mut bad = a.clone();
    bad.values[3] = f64::NAN;
    assert!(op_norm(&bad).is_err());
}

#[test]
fn zero_kernel_gives_zero_everywhere() {
    let z = builtin_kernel("zero", "").unwrap();
    let q = QuadratureSpec::default();
    let a = assembled(&z, &q);
    assert_eq!(a.max_abs(), 0.0);
    assert_eq!(op_norm(&a).unwrap(), 0.0);
    let p = AdmissibleTriple::power(1.0).unwrap();
    let fb = FBound::new(p.clone(), p, 2);
    let fit = prop47_bound_check(&a, &BoundParameters::new(0.1, 1.0, 6, 2).unwrap(), &fb, 1e-3).unwrap();
    assert_eq!(fit.constant, 0.0);
    assert!(fit.worst.is_none());
    let nec = necessity_bound_check(&a, 2.0, 2, 6).unwrap();
    assert_eq!((nec.constant, nec.tail_norm, nec.holds), (0.0, 0.0, true));
    let scan = weak_compactness_scan(&z, &basis(), &small_window(), &fb, 1e-3, &q, &Sequential).unwrap();
    assert_eq!((scan.m, scan.constant), (1, 0.0));
}

#[test]
fn rank_one_kernel_gives_a_matrix_unit() {
    let b = basis();
    let (i0, j0) = (DyadicInterval::new(0, 0), DyadicInterval::new(1, -2));
    let bb = b.clone();
    let f = move |t: f64, x: f64| bb.psi_value(&i0, t) * bb.psi_value(&j0, x);
    let k = CzKernel::new("rank_one", "", 1.0, 1.0, SingularityClass::Bounded, Arc::new(FnKernel(f))).unwrap();
    let q = QuadratureSpec { regular_level: 6, kernel_step: 1.0 / 64.0, ..QuadratureSpec::default() };
    let a = assembled(&k, &q);
    let (r, c) = (a.index_of(&i0).unwrap(), a.index_of(&j0).unwrap());
    for x in 0..a.n() {
        for y in 0..a.n() {
            let want = if (x, y) == (r, c) { 1.0 } else { 0.0 };
            assert!((a.get(x, y) - want).abs() < 1e-4, "{:?} {:?}: {}", a.intervals[x], a.intervals[y], a.get(x, y));
        }
    }
    assert!((op_norm(&a).unwrap() - 1.0).abs() < 1e-4);
    assert!((dual_pair(&k, &b, &i0, &j0, &q).unwrap() - a.get(r, c)).abs() < 1e-14);
}

#[test]
fn symmetric_and_antisymmetric_kernels() {
    let q = QuadratureSpec::default();
    let c = assembled(&builtin_kernel("commutator_gauss", "").unwrap(), &q);
    let scale = c.max_abs();
    assert!(scale > 0.0);
    for x in 0..c.n() {
        for y in 0..c.n() {
            assert!((c.get(x, y) - c.get(y, x)).abs() < 1e-12 * scale);
        }
    }
    let h = assembled(&builtin_kernel("hilbert", "").unwrap(), &q);
    for x in 0..h.n() {
        assert!(h.get(x, x).abs() < 1e-9, "{:?}: {}", h.intervals[x], h.get(x, x));
        for y in 0..h.n() {
            assert!((h.get(x, y) + h.get(y, x)).abs() < 1e-6);
        }
    }
    // pv ∫ f(s)/(s − x) ds is π times an isometry
    assert!(h.max_abs() <= std::f64::consts::PI + 1e-6);
    let (i, j) = (h.intervals[3], h.intervals[9]);
    let direct = dual_pair(&builtin_kernel("hilbert", "").unwrap(), &basis(), &i, &j, &q).unwrap();
    assert!((direct - h.entry(&i, &j).unwrap()).abs() < 1e-12);
}

#[test]
fn bound_parameters() {
    let p = BoundParameters::new(0.1, 1.0, 6, 3).unwrap();
    assert!((p.delta_prime() - 0.8).abs() < 1e-15);
    assert!(BoundParameters::new(0.6, 1.0, 6, 3).is_err());
    assert!(BoundParameters::new(0.0, 1.0, 6, 3).is_err());
    assert!(BoundParameters::new(0.1, 1.0, 6, 0).is_err());
    let (i, j) = (Interval::from_endpoints(0.0, 1.0).unwrap(), Interval::from_endpoints(3.0, 3.25).unwrap());
    let six = p.six_intervals(&i, &j);
    assert_eq!(six[0], i);
    assert_eq!(six[1], j);
    assert_eq!((six[2].left(), six[2].right()), (0.0, 3.25));
    assert!((six[3].length - 3.25).abs() < 1e-15);
    assert_eq!(six[3].center, j.center);
    assert!((six[5].length - 0.25 * 13f64.powf(0.1)).abs() < 1e-15);
}

#[test]
fn necessity_on_a_diagonal_matrix() {
    let w = small_window();
    let ivs = w.intervals().unwrap();
    let mut a = CoefficientMatrix::zeros(ivs.clone(), "test", "");
    for x in 0..a.n() {
        a.set(x, x, 0.5);
    }
    // with a tail column the tail norm is 0.5 and absorbs every diagonal entry
    let fit = necessity_bound_check(&a, 2.0, 1, 6).unwrap();
    assert_eq!(fit.alpha, 0.5);
    assert!(fit.holds);
    assert_eq!(fit.tail_norm, 0.5);
    assert_eq!(fit.constant, 0.0);
    // without one the weight has to carry the diagonal
    let fit = necessity_bound_check(&a, 4.0, 2, 6).unwrap();
    assert_eq!(fit.alpha, 0.75);
    let wmin = ivs.iter().map(|i| necessity_weight(&i.interval(), 0.75, 2, 6)).fold(f64::INFINITY, f64::min);
    assert!((fit.constant - 0.5 / wmin).abs() < 1e-12 * fit.constant);
    assert!(fit.holds);
    assert!(necessity_bound_check(&a, 1.0, 2, 6).is_err());
    assert!(necessity_bound_check(&a, f64::INFINITY, 2, 6).is_err());
}

#[test]
fn t1_functional_preconditions() {
    let z = builtin_kernel("zero", "").unwrap();
    let q = QuadratureSpec::default();
    let i = Interval::from_endpoints(0.0, 1.0).unwrap();
    let inner = Interval::new(0.5, 0.125).unwrap();
    let bump = cutoff_on(&inner);
    let mean_zero = bump.translate_dilate(-0.125, 1.0, f64::INFINITY).unwrap().sub(&bump.translate_dilate(0.125, 1.0, f64::INFINITY).unwrap());
    let v = t1_functional(&z, &mean_zero, &i, 3, 0.5, 1.0, &q).unwrap();
    assert_eq!(v.value, 0.0);
    assert!(t1_functional(&z, &mean_zero, &i, 0, 3.0, 1.0, &q).is_err());
    assert!(t1_functional(&z, &bump, &i, 3, 0.5, 1.0, &q).is_err());
    let outside = mean_zero.translate_dilate(2.0, 1.0, f64::INFINITY).unwrap();
    assert!(t1_functional(&z, &outside, &i, 3, 0.5, 1.0, &q).is_err());
    let unbounded = SampledFunction::from_fn(|_, out: &mut [f64]| out.fill(0.0), 2, None, 1.0);
    assert!(t1_functional(&z, &unbounded, &i, 3, 0.5, 1.0, &q).is_err());
    assert!(t1_limit(&[v], 1.0).is_err());
}
