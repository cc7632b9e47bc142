//! JSON report plumbing: exact floats, coefficient maps, atomic writes and
//! the metadata sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use czk_core::dyadic::{DyadicInterval, LagomWindow};
use czk_core::wavelets::CoefficientMap;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{config, CliError, Result};
use crate::hexfloat;

/// A float written as `{"dec": shortest decimal, "hex": exact bits}`.
/// Non-finite values carry their name in `dec`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Num", 2)?;
        if self.0.is_finite() {
            st.serialize_field("dec", &self.0)?;
        } else {
            st.serialize_field("dec", &hexfloat::format(self.0))?;
        }
        st.serialize_field("hex", &hexfloat::format(self.0))?;
        st.end()
    }
}

/// `(x, y)` pair of exact floats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point {
    pub x: Num,
    pub y: Num,
}

pub fn points(samples: &[(f64, f64)]) -> Vec<Point> {
    samples.iter().map(|&(x, y)| Point { x: Num(x), y: Num(y) }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowOut {
    pub m: u32,
    pub radius: Num,
    pub j_min: i32,
    pub j_max: i32,
}

impl From<&LagomWindow> for WindowOut {
    fn from(w: &LagomWindow) -> Self {
        WindowOut { m: w.m, radius: Num(w.radius), j_min: w.j_min, j_max: w.j_max }
    }
}

/// One coefficient-map record; the value is a hex float.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecord {
    pub j: i32,
    pub k: i64,
    pub value: String,
}

/// `[{j, k, value}]` in (j, k) order.
pub fn coefficients_to_json(c: &CoefficientMap) -> String {
    let recs: Vec<CoefficientRecord> = c.iter().map(|(i, v)| CoefficientRecord { j: i.j, k: i.k, value: hexfloat::format(v) }).collect();
    let mut s = serde_json::to_string_pretty(&recs).expect("records serialize");
    s.push('\n');
    s
}

pub fn coefficients_from_json(text: &str) -> Result<CoefficientMap> {
    let recs: Vec<CoefficientRecord> = serde_json::from_str(text).map_err(|e| config(format!("coefficient map: {e}")))?;
    let mut out = CoefficientMap::new();
    for r in recs {
        let i = DyadicInterval::new(r.j, r.k);
        if out.contains(&i) {
            return Err(config(format!("coefficient map: duplicate interval ({}, {})", r.j, r.k)));
        }
        let v = hexfloat::parse(&r.value).map_err(|e| config(format!("coefficient map: {e}")))?;
        if !v.is_finite() {
            return Err(config(format!("coefficient map: non-finite value at ({}, {})", r.j, r.k)));
        }
        out.insert(i, v);
    }
    Ok(out)
}

pub fn read_coefficients(path: &Path) -> Result<CoefficientMap> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig { path: path.to_path_buf(), source })?;
    coefficients_from_json(&text)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| CliError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    // temp files are created private; published files get ordinary permissions
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644)).map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// `report.json` → `report.json.meta.json`.
pub fn sidecar_path(report: &Path) -> PathBuf {
    let mut s = report.as_os_str().to_os_string();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Run facts that legitimately differ between runs; kept out of the report.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub started_unix_seconds: u64,
    pub elapsed_seconds: f64,
    pub threads: usize,
    pub cache: String,
    pub config_sha256: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn num_has_both_forms() {
        assert_eq!(serde_json::to_string(&Num(0.5)).unwrap(), r#"{"dec":0.5,"hex":"0x1.0000000000000p-1"}"#);
        assert_eq!(serde_json::to_string(&Num(f64::INFINITY)).unwrap(), r#"{"dec":"inf","hex":"inf"}"#);
    }

    #[test]
    fn coefficient_map_round_trip() {
        let mut c = CoefficientMap::new();
        c.insert(DyadicInterval::new(-2, 3), 0.1);
        c.insert(DyadicInterval::new(1, -1), -1e-300);
        let back = coefficients_from_json(&coefficients_to_json(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn coefficient_map_rejects_duplicates() {
        let text = r#"[{"j":0,"k":0,"value":"0x1p+0"},{"j":0,"k":0,"value":"0x1p+1"}]"#;
        assert!(coefficients_from_json(text).is_err());
    }
}
