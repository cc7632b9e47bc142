use czk_core::dyadic::{DyadicInterval, LagomWindow};
use czk_core::operators::CoefficientMatrix;
use czk_core::wavelets::CoefficientMap;
use czkit::cache::{self, decode, encode, DecodeError, Lookup, MatrixCache};
use czkit::config::RunConfig;
use czkit::{hexfloat, report};
use proptest::prelude::*;

fn sample_matrix(key: &str) -> CoefficientMatrix {
    let ivs = LagomWindow::new(1, 1.0, 0, 1).unwrap().intervals().unwrap();
    let mut a = CoefficientMatrix::zeros(ivs, "sample", key);
    let n = a.n();
    for (idx, v) in a.values.iter_mut().enumerate() {
        *v = (idx as f64 - 7.3).powi(3) * 1e-3;
    }
    a.values[1] = f64::MIN_POSITIVE / 8.0;
    a.values[2] = -0.0;
    a.extension[n + 1] = true;
    a.flagged.push((0, n - 1));
    a
}

#[test]
fn cache_round_trip() {
    let a = sample_matrix("key-a");
    let bytes = encode(&a);
    assert_eq!(&bytes[..4], cache::MAGIC);
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), cache::FORMAT_VERSION);
    let back = decode(&bytes, "key-a", "sample").unwrap();
    assert_eq!(back.intervals, a.intervals);
    assert_eq!(back.extension, a.extension);
    assert_eq!(back.flagged, a.flagged);
    let bits = |m: &CoefficientMatrix| m.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&back), bits(&a));
    assert_eq!(encode(&back), bytes);
}

#[test]
fn corrupt_cache_files_are_rejected() {
    let bytes = encode(&sample_matrix("key-a"));
    assert_eq!(decode(&bytes, "key-b", "sample").unwrap_err(), DecodeError::SpecMismatch);
    for at in [10, 60, bytes.len() / 2, bytes.len() - 1] {
        let mut b = bytes.clone();
        b[at] ^= 0x01;
        assert_eq!(decode(&b, "key-a", "sample").unwrap_err(), DecodeError::Checksum, "byte {at}");
    }
    let mut b = bytes.clone();
    b[0] = b'X';
    assert_eq!(decode(&b, "key-a", "sample").unwrap_err(), DecodeError::BadMagic);
    assert_eq!(decode(&bytes[..20], "key-a", "sample").unwrap_err(), DecodeError::Truncated);
    assert_eq!(decode(&[], "key-a", "sample").unwrap_err(), DecodeError::Truncated);
    // a consistent checksum over a cut body still fails on length
    let body = &bytes[..bytes.len() - 32 - 5];
    let mut b = body.to_vec();
    b.extend_from_slice(&<sha2::Sha256 as sha2::Digest>::digest(body));
    assert!(decode(&b, "key-a", "sample").is_err());
}

#[test]
fn matrix_cache_lookups() {
    let dir = tempfile::tempdir().unwrap();
    let c = MatrixCache::new(dir.path().join("nested"));
    let (none, l) = c.load("key-a", "sample").unwrap();
    assert!(none.is_none());
    assert_eq!(l, Lookup::Miss);

    let mut builds = 0;
    let (a, l) = c
        .get_or_build("key-a", "sample", || {
            builds += 1;
            Ok(sample_matrix("key-a"))
        })
        .unwrap();
    assert_eq!(l, Lookup::Miss);
    let (b, l) = c.get_or_build("key-a", "sample", || unreachable!()).unwrap();
    assert_eq!(l, Lookup::Hit);
    assert_eq!(builds, 1);
    assert_eq!(encode(&a), encode(&b));

    let path = c.path_for("key-a");
    let mut bytes = std::fs::read(&path).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xff;
    std::fs::write(&path, bytes).unwrap();
    let (none, l) = c.load("key-a", "sample").unwrap();
    assert!(none.is_none());
    assert!(matches!(l, Lookup::Rejected(ref why) if why.contains("checksum")));
    let (_, l) = c.get_or_build("key-a", "sample", || Ok(sample_matrix("key-a"))).unwrap();
    assert!(matches!(l, Lookup::Rejected(_)));
    assert_eq!(c.load("key-a", "sample").unwrap().1, Lookup::Hit);

    assert!(c.get_or_build("key-c", "sample", || Ok(sample_matrix("key-d"))).is_err());
    assert_ne!(c.path_for("key-a"), c.path_for("key-b"));
}

#[test]
fn hexfloat_examples() {
    assert_eq!(hexfloat::format(3.0), "0x1.8000000000000p+1");
    assert_eq!(hexfloat::format(-0.0), "-0x0.0000000000000p+0");
    assert_eq!(hexfloat::format(f64::from_bits(1)), "0x0.0000000000001p-1022");
    assert_eq!(hexfloat::parse("0x1p-1").unwrap(), 0.5);
    assert_eq!(hexfloat::parse("-inf").unwrap(), f64::NEG_INFINITY);
    assert!(hexfloat::parse("nan").unwrap().is_nan());
    for bad in ["", "1.5", "0x1.8", "0x2.0p+0", "0x1.gp+0", "0x1.00000000000000p+0", "0x1p+1024", "0x0.1p+0"] {
        assert!(hexfloat::parse(bad).is_err(), "{bad}");
    }
}

#[test]
fn unknown_config_keys_are_rejected() {
    for text in ["[kernel]\nspecs = \"x\"\n", "[nope]\n", "top = 1\n", "[cmo]\nms = [0]\n", "[window]\nradius = -1.0\n"] {
        assert!(RunConfig::parse(text).is_err(), "{text}");
    }
    let cfg = RunConfig::parse("").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(cfg.window().unwrap(), LagomWindow::default());
}

#[test]
fn window_override() {
    let mut cfg = RunConfig::default();
    cfg.override_window("3,1.5,-2,4").unwrap();
    assert_eq!(cfg.window().unwrap(), LagomWindow::new(3, 1.5, -2, 4).unwrap());
    for bad in ["3,1.5,-2", "a,1,0,1", "1,1,2,1", "0,1,0,1"] {
        let mut cfg = RunConfig::default();
        assert!(cfg.override_window(bad).and_then(|_| cfg.validate()).is_err(), "{bad}");
    }
}

#[test]
fn sidecar_and_atomic_write() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("sub/r.json");
    report::write_atomic(&p, b"{}\n").unwrap();
    report::write_atomic(&p, b"[]\n").unwrap();
    assert_eq!(std::fs::read(&p).unwrap(), b"[]\n");
    assert_eq!(std::fs::read_dir(dir.path().join("sub")).unwrap().count(), 1);
    assert_eq!(report::sidecar_path(&p), dir.path().join("sub/r.json.meta.json"));
}

fn arb_f64() -> impl Strategy<Value = f64> {
    prop_oneof![any::<u64>().prop_map(f64::from_bits), (0u64..1 << 52).prop_map(f64::from_bits), any::<f64>()]
}

proptest! {
    #[test]
    fn hexfloat_is_bit_exact(v in arb_f64()) {
        let back = hexfloat::parse(&hexfloat::format(v)).unwrap();
        if v.is_nan() {
            prop_assert!(back.is_nan());
        } else {
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn coefficient_json_round_trips(recs in proptest::collection::btree_map((-40i32..40, -1000i64..1000), arb_f64().prop_filter("finite", |v| v.is_finite()), 0..40)) {
        let c: CoefficientMap = recs.iter().map(|(&(j, k), &v)| (DyadicInterval::new(j, k), v)).collect();
        let text = report::coefficients_to_json(&c);
        let back = report::coefficients_from_json(&text).unwrap();
        prop_assert_eq!(back.len(), c.len());
        for ((i, v), (i2, v2)) in c.iter().zip(back.iter()) {
            prop_assert_eq!(i, i2);
            prop_assert_eq!(v.to_bits(), v2.to_bits());
        }
        prop_assert_eq!(report::coefficients_to_json(&back), text);
    }

    #[test]
    fn config_normalizes_to_a_fixed_point(m in 1u32..6, radius in 0.5f64..8.0, lo in -6i32..0, span in 0i32..6, ms in proptest::collection::vec(1u32..8, 1..5), t1 in any::<bool>()) {
        let text = format!("[cmo]\nms = {ms:?}\nt1 = {t1}\n\n[window]\nj_max = {}\nj_min = {lo}\nradius = {radius:?}\nm = {m}\n", lo + span);
        let cfg = RunConfig::parse(&text).unwrap();
        let norm = cfg.normalized();
        let again = RunConfig::parse(&norm).unwrap();
        prop_assert_eq!(&again, &cfg);
        prop_assert_eq!(again.normalized(), norm);
        prop_assert_eq!(cfg.window.radius.to_bits(), radius.to_bits());
    }
}
