//! Binary cache of assembled coefficient matrices.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "CZK1" | version: u32 | spec hash: [u8; 32] | records: u64
//! records × (j_I: i32, k_I: i64, j_J: i32, k_J: i64, value: f64, flags: u8)
//! sha256 of everything above: [u8; 32]
//! ```
//!
//! Records are row-major (input I outer). Flag bit 0 marks entries that used
//! the diagonal extension, bit 1 entries that failed the refinement check.

use std::path::{Path, PathBuf};

use czk_core::dyadic::DyadicInterval;
use czk_core::operators::CoefficientMatrix;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::report::write_atomic;

pub const MAGIC: &[u8; 4] = b"CZK1";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 32 + 8;
const RECORD_LEN: usize = 4 + 8 + 4 + 8 + 8 + 1;
const EXTENSION: u8 = 1;
const FLAGGED: u8 = 2;

/// sha256 over the format version and the assembly key.
pub fn spec_hash(key: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(MAGIC);
    h.update(FORMAT_VERSION.to_le_bytes());
    h.update(key.as_bytes());
    h.finalize().into()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn encode(a: &CoefficientMatrix) -> Vec<u8> {
    let n = a.n();
    let mut out = Vec::with_capacity(HEADER_LEN + n * n * RECORD_LEN + 32);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&spec_hash(&a.spec_key));
    out.extend_from_slice(&((n * n) as u64).to_le_bytes());
    let mut flagged = vec![false; n * n];
    for &(r, c) in &a.flagged {
        flagged[r * n + c] = true;
    }
    for r in 0..n {
        for c in 0..n {
            let (i, j) = (a.intervals[r], a.intervals[c]);
            out.extend_from_slice(&i.j.to_le_bytes());
            out.extend_from_slice(&i.k.to_le_bytes());
            out.extend_from_slice(&j.j.to_le_bytes());
            out.extend_from_slice(&j.k.to_le_bytes());
            out.extend_from_slice(&a.get(r, c).to_le_bytes());
            let mut flags = 0u8;
            if a.extension[r * n + c] {
                flags |= EXTENSION;
            }
            if flagged[r * n + c] {
                flags |= FLAGGED;
            }
            out.push(flags);
        }
    }
    let sum: [u8; 32] = Sha256::digest(&out).into();
    out.extend_from_slice(&sum);
    out
}

/// Why a cache file was not usable.
#[derive(Debug, PartialEq, Eq)]
pub enum DecodeError {
    Truncated,
    BadMagic,
    Version(u32),
    SpecMismatch,
    Checksum,
    Layout(&'static str),
}

impl std::fmt::Display for DecodeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecodeError::Truncated => write!(f, "truncated"),
            DecodeError::BadMagic => write!(f, "bad magic"),
            DecodeError::Version(v) => write!(f, "format version {v}, expected {FORMAT_VERSION}"),
            DecodeError::SpecMismatch => write!(f, "spec hash does not match the requested assembly"),
            DecodeError::Checksum => write!(f, "checksum mismatch"),
            DecodeError::Layout(what) => write!(f, "{what}"),
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut a = [0u8; N];
        a.copy_from_slice(&self.buf[self.at..self.at + N]);
        self.at += N;
        a
    }
}

/// Decodes a matrix assembled under `key`; `kernel` labels the result.
pub fn decode(bytes: &[u8], key: &str, kernel: &str) -> std::result::Result<CoefficientMatrix, DecodeError> {
    if bytes.len() < HEADER_LEN + 32 {
        return Err(DecodeError::Truncated);
    }
    if &bytes[..4] != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    let (body, sum) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != sum {
        return Err(DecodeError::Checksum);
    }
    let mut rd = Reader { buf: body, at: 4 };
    let version = u32::from_le_bytes(rd.take());
    if version != FORMAT_VERSION {
        return Err(DecodeError::Version(version));
    }
    if rd.take::<32>() != spec_hash(key) {
        return Err(DecodeError::SpecMismatch);
    }
    let count = u64::from_le_bytes(rd.take()) as usize;
    if body.len() != HEADER_LEN + count * RECORD_LEN {
        return Err(DecodeError::Truncated);
    }
    let n = (count as f64).sqrt().round() as usize;
    if n * n != count {
        return Err(DecodeError::Layout("record count is not a square"));
    }
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let i = DyadicInterval::new(i32::from_le_bytes(rd.take()), i64::from_le_bytes(rd.take()));
        let j = DyadicInterval::new(i32::from_le_bytes(rd.take()), i64::from_le_bytes(rd.take()));
        let v = f64::from_le_bytes(rd.take());
        let flags = rd.take::<1>()[0];
        rows.push((i, j, v, flags));
    }
    let intervals: Vec<DyadicInterval> = rows[..n].iter().map(|r| r.1).collect();
    if !intervals.windows(2).all(|w| w[0] < w[1]) {
        return Err(DecodeError::Layout("intervals out of order"));
    }
    let mut a = CoefficientMatrix::zeros(intervals.clone(), kernel, key);
    for (idx, (i, j, v, flags)) in rows.into_iter().enumerate() {
        let (r, c) = (idx / n, idx % n);
        if i != intervals[r] || j != intervals[c] {
            return Err(DecodeError::Layout("record indices disagree with the interval list"));
        }
        a.values[idx] = v;
        a.extension[idx] = flags & EXTENSION != 0;
        if flags & FLAGGED != 0 {
            a.flagged.push((r, c));
        }
    }
    Ok(a)
}

/// Outcome of a cache lookup, for the metadata sidecar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lookup {
    Hit,
    Miss,
    /// The file existed but could not be used; it was rebuilt.
    Rejected(String),
    Disabled,
}

impl Lookup {
    pub fn label(&self) -> String {
        match self {
            Lookup::Hit => "hit".into(),
            Lookup::Miss => "miss".into(),
            Lookup::Rejected(why) => format!("rejected ({why})"),
            Lookup::Disabled => "disabled".into(),
        }
    }
}

/// A directory of `<spec hash>.czk` files.
#[derive(Clone, Debug)]
pub struct MatrixCache {
    dir: PathBuf,
}

impl MatrixCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        MatrixCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{}.czk", hex(&spec_hash(key))))
    }

    pub fn load(&self, key: &str, kernel: &str) -> Result<(Option<CoefficientMatrix>, Lookup)> {
        let path = self.path_for(key);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((None, Lookup::Miss)),
            Err(source) => return Err(CliError::Io { path, source }),
        };
        match decode(&bytes, key, kernel) {
            Ok(a) => Ok((Some(a), Lookup::Hit)),
            Err(e) => Ok((None, Lookup::Rejected(e.to_string()))),
        }
    }

    pub fn store(&self, a: &CoefficientMatrix) -> Result<PathBuf> {
        let path = self.path_for(&a.spec_key);
        write_atomic(&path, &encode(a))?;
        Ok(path)
    }

    /// Loads the matrix for `key`, or builds and stores it.
    pub fn get_or_build(
        &self,
        key: &str,
        kernel: &str,
        build: impl FnOnce() -> Result<CoefficientMatrix>,
    ) -> Result<(CoefficientMatrix, Lookup)> {
        let (found, lookup) = self.load(key, kernel)?;
        if let Some(a) = found {
            return Ok((a, lookup));
        }
        let a = build()?;
        if a.spec_key != key {
            return Err(CliError::Cache { path: self.path_for(key), reason: "built matrix carries a different spec key".into() });
        }
        self.store(&a)?;
        Ok((a, lookup))
    }
}
