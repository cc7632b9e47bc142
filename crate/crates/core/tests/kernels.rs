use std::sync::Arc;

use czk_core::admissible::AdmissibleTriple;
use czk_core::exec::Sequential;
use czk_core::kernels::*;
use proptest::prelude::*;

fn spec(count: usize, offset: u64) -> SampleSpec {
    SampleSpec { count, offset, ..SampleSpec::default() }
}

fn fitted(name: &str) -> CzKernel {
    let k = builtin_kernel(name, "").unwrap();
    let t = fit_admissible(&k, &spec(4000, 1), &Sequential).unwrap();
    k.with_triple(t)
}

#[test]
fn builtin_values() {
    let c = builtin_kernel("commutator_gauss", "").unwrap();
    assert!((c.eval(0.0, 1.0) - ((-1f64).exp() - 1.0)).abs() < 1e-15);
    assert!((c.eval(2.0, -3.0) - ((-4f64).exp() - (-9f64).exp()) / 5.0).abs() < 1e-16);
    let h = builtin_kernel("hilbert", "").unwrap();
    assert_eq!(h.eval(0.0, 1.0), -1.0);
    assert_eq!(h.eval(3.0, 1.0), 0.5);
    let z = builtin_kernel("zero", "").unwrap();
    assert_eq!(z.eval(1.0, 2.0), 0.0);
    assert!(builtin_kernel("nope", "").is_err());
}

#[test]
fn kernel_specs_parse() {
    assert_eq!(parse_kernel_spec("damped_hilbert:4,2"), ("damped_hilbert".into(), "4,2".into()));
    assert_eq!(parse_kernel_spec(" hilbert "), ("hilbert".into(), String::new()));
    let d = kernel_from_spec("damped_hilbert:8,1").unwrap();
    assert_eq!(d.params, "8,1");
    assert!(kernel_from_spec("damped_hilbert:8").is_err());
    assert!(kernel_from_spec("damped_hilbert:8,x").is_err());
    assert!(kernel_from_spec("damped_hilbert:-1,1").is_err());
}

#[test]
fn commutator_is_accurate_near_the_diagonal() {
    let c = builtin_kernel("commutator_gauss", "").unwrap();
    for x in [-1.3, 0.2, 0.7, 2.5] {
        let b1 = -2.0 * x * f64::exp(-x * x);
        let b2 = (4.0 * x * x - 2.0) * f64::exp(-x * x);
        assert_eq!(c.eval(x, x), b1);
        for h in [1e-12, 1e-9, 1e-6] {
            // first-order Taylor expansion of the difference quotient
            let want = b1 + 0.5 * b2 * h;
            assert!((c.eval(x + h, x) - want).abs() < 1e-11, "x = {x}, h = {h}");
        }
    }
}

#[test]
fn smoothness_ratio_examples() {
    let h = builtin_kernel("hilbert", "").unwrap();
    let r = smoothness_ratio(&h, 0.0, 1.0, 0.1, 1.0).unwrap();
    assert!((r - 1.0 / 0.9).abs() < 1e-12);
    assert!(smoothness_ratio(&h, 0.0, 1.0, 0.5, 1.0).is_err());
    let z = builtin_kernel("zero", "").unwrap();
    assert_eq!(smoothness_ratio(&z, 0.0, 1.0, 0.1, 1.1).unwrap(), 0.0);
    // a kernel of t − x alone gives 0 when both points move together
    let conv = CzKernel::new("conv", "", 1.0, 1.0, SingularityClass::Bounded, Arc::new(FnKernel(|t: f64, x: f64| (-(t - x).powi(2)).exp()))).unwrap();
    assert!(smoothness_ratio(&conv, 0.0, 3.0, 0.2, 3.2).unwrap().abs() < 1e-12);
}

#[test]
fn adjoint_swaps_arguments() {
    let d = kernel_from_spec("damped_hilbert").unwrap();
    let a = d.adjoint();
    assert_eq!(a.name, "damped_hilbert*");
    assert_eq!(a.adjoint().name, "damped_hilbert");
    for (t, x) in [(0.3, -2.0), (5.0, 1.0), (-7.0, 6.5)] {
        assert_eq!(a.eval(t, x), d.eval(x, t));
        assert!((a.symbol(t, x) - (t - x) * a.eval(t, x)).abs() < 1e-15);
    }
}

#[test]
fn kernel_constructor_rejects_bad_parameters() {
    let f = Arc::new(FnKernel(|_: f64, _: f64| 0.0));
    assert!(CzKernel::new("k", "", 0.0, 1.0, SingularityClass::Bounded, f.clone()).is_err());
    assert!(CzKernel::new("k", "", 1.5, 1.0, SingularityClass::Bounded, f.clone()).is_err());
    assert!(CzKernel::new("k", "", 1.0, 0.0, SingularityClass::Bounded, f).is_err());
}

#[test]
fn verification_of_zero_and_mismatched_kernels() {
    let z = builtin_kernel("zero", "").unwrap().with_triple(AdmissibleTriple::zero());
    let d = verify_compact_czk(&z, &spec(2000, 1), &Sequential).unwrap();
    assert!(d.violations.is_empty());
    assert_eq!(d.fitted_constant, 0.0);

    let h = builtin_kernel("hilbert", "").unwrap().with_triple(AdmissibleTriple::exponential());
    let d = verify_compact_czk(&h, &spec(2000, 1), &Sequential).unwrap();
    assert!(!d.violations.is_empty());

    assert!(verify_compact_czk(&builtin_kernel("hilbert", "").unwrap(), &spec(10, 1), &Sequential).is_err());
}

#[test]
fn fitted_triples_cover_their_samples() {
    let c = fitted("commutator_gauss").with_constant(1.0);
    let d = verify_compact_czk(&c, &spec(4000, 1), &Sequential).unwrap();
    assert!(d.violations.is_empty(), "{:?}", d.violations.first());
    assert!(d.fitted_constant <= 1.0 + 1e-12);
    let t = c.triple.as_ref().unwrap();
    assert_eq!(t.check_monotone(), [true; 3]);
}

#[test]
fn fitted_eccentric_envelope_decays_only_for_the_commutator() {
    let c = fitted("commutator_gauss");
    let tc = c.triple.as_ref().unwrap();
    assert!(tc.d(1024.0) < 0.1 * tc.d(1.0), "{} vs {}", tc.d(1024.0), tc.d(1.0));
    let h = fitted("hilbert");
    let th = h.triple.as_ref().unwrap();
    assert!(th.d(1024.0) > 0.5 * th.d(1.0));
}

#[test]
fn decay_envelope_certificates() {
    let z = builtin_kernel("zero", "").unwrap().with_triple(AdmissibleTriple::zero());
    let cert = decay_envelope(&z, 0.0, 1.0, 0.1).unwrap();
    assert!(cert.holds);
    assert_eq!(cert.margin, f64::INFINITY);
    assert_eq!(cert.terms, 113);

    let c = fitted("commutator_gauss");
    for (t, x) in [(0.0, 1.0), (-3.0, 4.0), (10.0, 10.5)] {
        assert!(decay_envelope(&c, t, x, 0.1).unwrap().holds, "({t}, {x})");
    }
    assert!(decay_envelope(&c, 1.0, 1.0, 0.1).is_err());
    assert!(decay_envelope(&c, 0.0, 1.0, 0.5).is_err());
}

#[test]
fn hilbert_regularity_profile_is_scale_invariant() {
    let h = builtin_kernel("hilbert", "").unwrap();
    let s = SearchSpec::default();
    for x in [1.0, 1000.0, -0.001] {
        let p = regularity_profile(&h, 0.0, x, 0.5, &s).unwrap();
        assert!((p - 2f64.sqrt()).abs() < 1e-6, "x = {x}: {p}");
    }
    assert!(regularity_profile(&h, 0.0, 1.0, 1.0, &s).is_err());
    assert!(regularity_profile(&h, 1.0, 1.0, 0.5, &s).is_err());
}

proptest! {
    #[test]
    fn symmetry_of_builtin_kernels(t in -50.0f64..50.0, x in -50.0f64..50.0) {
        prop_assume!((t - x).abs() > 1e-6);
        let c = builtin_kernel("commutator_gauss", "").unwrap();
        prop_assert!((c.eval(t, x) - c.eval(x, t)).abs() <= 1e-15 * c.eval(t, x).abs().max(1e-300));
        let h = builtin_kernel("hilbert", "").unwrap();
        prop_assert_eq!(h.eval(t, x), -h.eval(x, t));
        let d = kernel_from_spec("damped_hilbert").unwrap();
        prop_assert!((d.eval(t, x) + d.eval(x, t)).abs() <= 1e-12 * d.eval(t, x).abs());
    }

    #[test]
    fn samples_satisfy_the_precondition(n in 0usize..100_000, offset in 1u64..1000) {
        let s = spec(1, offset).tuple(n);
        let d = (s.t - s.x).abs();
        prop_assert!(2.0 * ((s.t - s.tp).abs() + (s.x - s.xp).abs()) < d);
    }
}
