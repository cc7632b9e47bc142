//! Compactly supported orthonormal wavelets (Daubechies extremal phase),
//! tabulated with two derivatives, plus coefficient maps and lagom projections.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::bumps::{self, Profile, SampledFunction};
use crate::dyadic::{is_lagom, DyadicInterval, LagomWindow};
use crate::error::{arg, Error, Result};
use crate::exec::Executor;
use crate::hilbert::HilbertTable;
use crate::math;
use crate::quad;

/// Construction parameters of a [`WaveletBasis`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisParams {
    pub vanishing_moments: usize,
    /// Tables hold ψ, ψ', ψ'' at spacing 2^{-table_level}.
    pub table_level: u32,
    /// Grid level of the tabulated Hilbert transform of ψ.
    pub hilbert_level: u32,
    /// Trapezoid level (nodes per |I|) for coefficient quadrature.
    pub coeff_level: u32,
    pub tau_orth: f64,
}

impl Default for BasisParams {
    fn default() -> Self {
        BasisParams { vanishing_moments: 6, table_level: 12, hilbert_level: 8, coeff_level: 8, tau_orth: 1e-6 }
    }
}

/// Low-pass filter h of the extremal-phase Daubechies wavelet, Σh = √2.
pub fn daubechies_filter(n: usize) -> Result<Vec<f64>> {
    if !(1..=12).contains(&n) {
        return Err(arg(format!("vanishing moments must be in 1..=12, got {n}")));
    }
    // roots of Σ_{k<n} C(n−1+k, k) y^k, with y = (2 − z − 1/z)/4
    let coeffs: Vec<f64> = (0..n).map(|k| math::binomial(n - 1 + k, k)).collect();
    let y_roots = poly_roots(&coeffs)?;
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for y in y_roots {
        let b = Complex64::new(2.0, 0.0) - y * 4.0;
        let disc = (b * b - 4.0).sqrt();
        let z1 = (b + disc) * 0.5;
        let z2 = (b - disc) * 0.5;
        let z = if z1.norm() < 1.0 { z1 } else { z2 };
        poly = poly_mul(&poly, &[-z, Complex64::new(1.0, 0.0)]);
    }
    for _ in 0..n {
        poly = poly_mul(&poly, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
    let mut h: Vec<f64> = poly.iter().rev().map(|c| c.re).collect();
    let s: f64 = h.iter().sum();
    let norm = math::sqrt(2.0) / s;
    h.iter_mut().for_each(|v| *v *= norm);
    Ok(h)
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_eval(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Roots of Σ c_k y^k by Durand–Kerner, polished with Newton steps.
fn poly_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let deg = c.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = c[deg];
    let monic: Vec<f64> = c.iter().map(|v| v / lead).collect();
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * 2.0).collect();
    for _ in 0..2000 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let (p, _) = poly_eval(&monic, roots[i]);
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, r) in roots.iter().enumerate() {
                if j != i {
                    denom *= roots[i] - r;
                }
            }
            let step = p / denom;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = poly_eval(&monic, *r);
            if dp.norm() > 0.0 {
                *r -= p / dp;
            }
        }
        if !(r.re.is_finite() && r.im.is_finite()) {
            return Err(Error::NoConvergence { what: "filter root finding", iterations: 2000 });
        }
    }
    Ok(roots)
}

/// Values of φ^{(order)} at the integers 1..S−1 (S = filter length − 1).
fn integer_values(c: &[f64], order: usize) -> Result<Vec<f64>> {
    let s = c.len() - 1;
    let n = s - 1;
    let lambda = math::pow2(-(order as i32));
    let mut a = vec![0.0; n * n];
    for i in 1..=n {
        for m in 1..=n {
            let idx = 2 * i as i64 - m as i64;
            if idx >= 0 && (idx as usize) < c.len() {
                a[(i - 1) * n + (m - 1)] = c[idx as usize];
            }
        }
        a[(i - 1) * n + (i - 1)] -= lambda;
    }
    // the eigen-equation has rank n − 1; swap one row for the moment normalization
    let mut best: Option<(f64, Vec<f64>)> = None;
    for drop in 0..n {
        let mut sys = a.clone();
        for m in 1..=n {
            sys[drop * n + (m - 1)] = math::powi(-(m as f64), order as i32);
        }
        let mut rhs = vec![0.0; n];
        rhs[drop] = math::factorial(order);
        if let Some(v) = math::solve(sys, rhs) {
            let mut resid: f64 = 0.0;
            for i in 0..n {
                let r: f64 = (0..n).map(|m| a[i * n + m] * v[m]).sum();
                resid = resid.max(r.abs());
            }
            if best.as_ref().map_or(true, |b| resid < b.0) {
                best = Some((resid, v));
            }
        }
    }
    match best {
        Some((resid, v)) if resid < 1e-9 => Ok(v),
        _ => Err(Error::NoConvergence { what: "refinable integer values", iterations: n }),
    }
}

/// φ^{(order)} on [0, S] at spacing 2^{-level} by dyadic refinement.
fn refine(c: &[f64], order: usize, level: u32) -> Result<Vec<f64>> {
    let s = c.len() - 1;
    let ints = integer_values(c, order)?;
    let mut vals = vec![0.0; s + 1];
    vals[1..s].copy_from_slice(&ints);
    let gain = math::pow2(order as i32);
    for lev in 0..level {
        let span = s << lev;
        let mut next = vec![0.0; 2 * span + 1];
        for (p, v) in vals.iter().enumerate() {
            next[2 * p] = *v;
        }
        let stride = 1i64 << lev;
        for p in 0..span {
            let mut acc = 0.0;
            for (k, ck) in c.iter().enumerate() {
                let q = (2 * p + 1) as i64 - k as i64 * stride;
                if q >= 0 && q <= span as i64 {
                    acc += ck * vals[q as usize];
                }
            }
            next[2 * p + 1] = gain * acc;
        }
        vals = next;
    }
    Ok(vals)
}

/// Tabulated centered mother wavelet ψ̃(y) = ψ(y + ρ), ρ = S/2.
struct Mother {
    half_support: f64,
    step: f64,
    inv_step: f64,
    tables: [Vec<f64>; 3],
    /// Quintic Hermite polynomial of each cell in the local coordinate s ∈ [0, 1).
    cells: Vec<[f64; 6]>,
    hilbert: Option<HilbertTable>,
}

const QUINTIC: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
    [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
    [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
    [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
    [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
    [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
];

impl Mother {
    fn new(half_support: f64, step: f64, tables: [Vec<f64>; 3]) -> Self {
        let h = step;
        let cells = (0..tables[0].len() - 1)
            .map(|i| {
                let data = [tables[0][i], tables[1][i] * h, tables[2][i] * h * h, tables[2][i + 1] * h * h, tables[1][i + 1] * h, tables[0][i + 1]];
                let mut p = [0.0; 6];
                for (b, d) in QUINTIC.iter().zip(data) {
                    for k in 0..6 {
                        p[k] += b[k] * d;
                    }
                }
                p
            })
            .collect();
        Mother { half_support, step, inv_step: 1.0 / step, tables, cells, hilbert: None }
    }

    fn eval(&self, y: f64, out: &mut [f64]) {
        out.fill(0.0);
        let u = (y + self.half_support) * self.inv_step;
        let last = (self.tables[0].len() - 1) as f64;
        if !(u >= 0.0 && u <= last) {
            return;
        }
        let i = math::floor(u) as usize;
        let s = u - i as f64;
        let want = out.len().min(3);
        if s == 0.0 {
            for (n, o) in out.iter_mut().take(want).enumerate() {
                *o = self.tables[n][i];
            }
            return;
        }
        let h = self.step;
        let p = &self.cells[i];
        let mut v = [0.0; 3];
        for k in (0..6).rev() {
            v[2] = v[2] * s + v[1] * 2.0;
            v[1] = v[1] * s + v[0];
            v[0] = v[0] * s + p[k];
        }
        // v[2] holds P''/2 from the nested Horner scheme
        let vals = [v[0], v[1] / h, v[2] / (h * h)];
        for (n, o) in out.iter_mut().take(want).enumerate() {
            *o = vals[n];
        }
        for o in out.iter_mut().skip(3) {
            *o = f64::NAN;
        }
    }

    fn value(&self, y: f64) -> f64 {
        let u = (y + self.half_support) * self.inv_step;
        if !(u >= 0.0 && u < self.cells.len() as f64) {
            return if u == self.cells.len() as f64 { self.tables[0][self.cells.len()] } else { 0.0 };
        }
        let i = math::floor(u) as usize;
        let s = u - i as f64;
        if s == 0.0 {
            return self.tables[0][i];
        }
        let p = &self.cells[i];
        ((((p[5] * s + p[4]) * s + p[3]) * s + p[2]) * s + p[1]) * s + p[0]
    }
}

struct MotherProfile(Arc<Mother>);

impl Profile for MotherProfile {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        self.0.eval(x, out)
    }

    fn value(&self, x: f64) -> f64 {
        self.0.value(x)
    }

    fn hilbert(&self, x: f64) -> Option<f64> {
        self.0.hilbert.as_ref().map(|t| t.eval(x))
    }
}

/// ψ_I = |I|^{-1/2} ψ̃((x − c(I))/|I|) over dyadic I, with companion φ_I.
#[derive(Clone)]
pub struct WaveletBasis {
    params: BasisParams,
    filter: Vec<f64>,
    mother: Arc<Mother>,
}

impl core::fmt::Debug for WaveletBasis {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("WaveletBasis").field("params", &self.params).finish()
    }
}

impl WaveletBasis {
    pub fn new(params: BasisParams) -> Result<Self> {
        if !(4..=16).contains(&params.table_level) {
            return Err(arg("table level must be in 4..=16"));
        }
        if params.hilbert_level > params.table_level || params.coeff_level > params.table_level {
            return Err(arg("quadrature levels cannot exceed the table level"));
        }
        if !(params.tau_orth > 0.0) {
            return Err(arg("tau_orth must be positive"));
        }
        let h = daubechies_filter(params.vanishing_moments)?;
        let c: Vec<f64> = h.iter().map(|v| v * math::sqrt(2.0)).collect();
        let len = c.len();
        let s = len - 1;
        let d: Vec<f64> = (0..len).map(|k| if k % 2 == 0 { c[s - k] } else { -c[s - k] }).collect();
        let level = params.table_level;
        let span = s << level;
        let stride = 1i64 << level;
        let mut tables: [Vec<f64>; 3] = [vec![0.0; span + 1], vec![0.0; span + 1], vec![0.0; span + 1]];
        for (order, table) in tables.iter_mut().enumerate() {
            let phi = refine(&c, order, level)?;
            let gain = math::pow2(order as i32);
            for (p, slot) in table.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (k, dk) in d.iter().enumerate() {
                    let q = 2 * p as i64 - k as i64 * stride;
                    if q >= 0 && q <= span as i64 {
                        acc += dk * phi[q as usize];
                    }
                }
                *slot = gain * acc;
            }
        }
        let step = math::pow2(-(level as i32));
        let mut mother = Mother::new(s as f64 / 2.0, step, tables);
        let hl = params.hilbert_level;
        let stride = 1usize << (level - hl);
        let pick = |t: &Vec<f64>| -> Vec<f64> { t.iter().step_by(stride).copied().collect() };
        let first = -((s << hl) as i64) / 2;
        mother.hilbert = Some(HilbertTable::from_samples(
            math::pow2(-(hl as i32)),
            first,
            &pick(&mother.tables[0]),
            &pick(&mother.tables[1]),
            &pick(&mother.tables[2]),
            8.0,
        ));
        Ok(WaveletBasis { params, filter: h, mother: Arc::new(mother) })
    }

    pub fn params(&self) -> &BasisParams {
        &self.params
    }

    pub fn filter(&self) -> &[f64] {
        &self.filter
    }

    /// ρ: ψ_I is supported in c(I) ± ρ|I|.
    pub fn half_support(&self) -> f64 {
        self.mother.half_support
    }

    pub fn support(&self, i: &DyadicInterval) -> (f64, f64) {
        let r = self.mother.half_support * i.length();
        (i.center() - r, i.center() + r)
    }

    /// The centered mother wavelet, order 2, with a tabulated Hilbert transform.
    pub fn mother(&self) -> SampledFunction {
        let r = self.mother.half_support;
        SampledFunction::new(Arc::new(MotherProfile(self.mother.clone())), 2, Some((-r, r)), 1.0)
    }

    pub fn psi(&self, i: &DyadicInterval) -> SampledFunction {
        self.mother().translate_dilate(i.center(), i.length(), 2.0).expect("dyadic length is positive")
    }

    /// ψ̃(y) without building a function handle.
    pub fn mother_value(&self, y: f64) -> f64 {
        self.mother.value(y)
    }

    /// (ψ̃, ψ̃', ψ̃'') at y.
    pub fn mother_derivs(&self, y: f64) -> [f64; 3] {
        let mut o = [0.0; 3];
        self.mother.eval(y, &mut o);
        o
    }

    pub fn psi_value(&self, i: &DyadicInterval, x: f64) -> f64 {
        let len = i.length();
        self.mother.value((x - i.center()) / len) / math::sqrt(len)
    }

    /// Hψ̃(y) = pv ∫ ψ̃(s)/(s − y) ds.
    pub fn mother_hilbert(&self, y: f64) -> f64 {
        self.mother.hilbert.as_ref().expect("built in new").eval(y)
    }

    /// (Hψ̃(y), (Hψ̃)'(y)).
    pub fn mother_hilbert_with_slope(&self, y: f64) -> (f64, f64) {
        self.mother.hilbert.as_ref().expect("built in new").eval_with_slope(y)
    }

    /// Hψ_I(x) = |I|^{-1/2} Hψ̃((x − c(I))/|I|).
    pub fn hilbert_psi(&self, i: &DyadicInterval, x: f64) -> f64 {
        let len = i.length();
        self.mother_hilbert((x - i.center()) / len) / math::sqrt(len)
    }

    /// Companion φ(y) = (4/3) Φ(4y): positive, supported in [−1/2, 1/2], integral one.
    pub fn companion(&self) -> SampledFunction {
        bumps::cutoff().translate_dilate(0.0, 0.25, f64::INFINITY).expect("positive").scaled(4.0 / 3.0)
    }

    /// φ_I = |I|^{-1} φ((x − c(I))/|I|).
    pub fn phi(&self, i: &DyadicInterval) -> SampledFunction {
        self.companion().translate_dilate(i.center(), i.length(), 1.0).expect("dyadic length is positive")
    }

    /// φ_I(x) by the value-only fast path.
    pub fn phi_value(&self, i: &DyadicInterval, x: f64) -> f64 {
        let len = i.length();
        bumps::cutoff_value(4.0 * (x - i.center()) / len) * (4.0 / 3.0) / len
    }

    /// ⟨f, ψ_I⟩ by the trapezoid rule on the aligned grid.
    pub fn coeff(&self, f: &SampledFunction, i: &DyadicInterval) -> Result<f64> {
        let (mut a, mut b) = self.support(i);
        if let Some((fa, fb)) = f.support {
            a = a.max(fa);
            b = b.min(fb);
        }
        if a >= b {
            return Ok(0.0);
        }
        let step = quad::pow2_floor(i.length().min(f.scale)) * math::pow2(-(self.params.coeff_level as i32));
        let v = quad::grid_sum(&|x| f.value(x) * self.psi_value(i, x), a, b, step);
        if !v.is_finite() {
            return Err(Error::Quadrature(format!("non-finite coefficient at ({}, {})", i.j, i.k)));
        }
        Ok(v)
    }

    /// Coefficients of f on every interval of the window.
    pub fn analyze(&self, f: &SampledFunction, window: &LagomWindow, exec: &dyn Executor) -> Result<CoefficientMap> {
        let ivs = window.intervals()?;
        let mut failed = None;
        let vals = exec.map(ivs.len(), &|n| self.coeff(f, &ivs[n]).unwrap_or(f64::NAN));
        let mut map = CoefficientMap::with_window(*window);
        for (i, v) in ivs.iter().zip(vals) {
            if !v.is_finite() && failed.is_none() {
                failed = Some(*i);
            }
            map.insert(*i, v);
        }
        if let Some(i) = failed {
            return Err(Error::Quadrature(format!("coefficient at ({}, {}) failed", i.j, i.k)));
        }
        Ok(map)
    }

    /// Σ c_I ψ_I as a function handle.
    pub fn synthesize(&self, c: &CoefficientMap) -> SampledFunction {
        let mut per_scale: BTreeMap<i32, BTreeMap<i64, f64>> = BTreeMap::new();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut scale = f64::INFINITY;
        for (i, v) in c.iter() {
            if v != 0.0 {
                per_scale.entry(i.j).or_default().insert(i.k, v);
                let (a, b) = self.support(&i);
                lo = lo.min(a);
                hi = hi.max(b);
                scale = scale.min(i.length());
            }
        }
        if per_scale.is_empty() {
            return SampledFunction::zero();
        }
        let profile = Synthesis::new(self.clone(), per_scale);
        SampledFunction::new(Arc::new(profile), 2, Some((lo, hi)), scale)
    }

    /// max |⟨ψ_I, ψ_J⟩ − δ_IJ| over the window.
    pub fn gram_deviation(&self, window: &LagomWindow, exec: &dyn Executor) -> Result<f64> {
        let ivs = window.intervals()?;
        let q = self.params.coeff_level as i32;
        let rows = exec.map(ivs.len(), &|n| {
            let a = ivs[n];
            let (a0, a1) = self.support(&a);
            let mut worst: f64 = 0.0;
            for b in &ivs[n..] {
                let (b0, b1) = self.support(b);
                let (lo, hi) = (a0.max(b0), a1.min(b1));
                let target = if *b == a { 1.0 } else { 0.0 };
                if lo >= hi {
                    worst = worst.max(target);
                    continue;
                }
                let step = a.length().min(b.length()) * math::pow2(-q);
                let g = quad::grid_sum(&|x| self.psi_value(&a, x) * self.psi_value(b, x), lo, hi, step);
                worst = worst.max((g - target).abs());
            }
            worst
        });
        Ok(rows.into_iter().fold(0.0, f64::max))
    }
}

/// Coefficients of one scale, dense from `k0`.
struct ScaleRow {
    j: i32,
    inv_len: f64,
    norm: f64,
    k0: i64,
    coeffs: Vec<f64>,
}

impl ScaleRow {
    /// Index range of the coefficients whose ψ_I can be nonzero at x.
    fn active(&self, x: f64, r: f64) -> (f64, core::ops::Range<usize>) {
        let u = x * self.inv_len - 0.5;
        let lo = (math::floor(u - r) as i64 - self.k0).clamp(0, self.coeffs.len() as i64) as usize;
        let hi = (math::ceil(u + r) as i64 + 1 - self.k0).clamp(0, self.coeffs.len() as i64) as usize;
        (u, lo..hi)
    }
}

struct Synthesis {
    basis: WaveletBasis,
    rows: Vec<ScaleRow>,
}

impl Synthesis {
    fn new(basis: WaveletBasis, per_scale: BTreeMap<i32, BTreeMap<i64, f64>>) -> Self {
        let rows = per_scale
            .into_iter()
            .map(|(j, row)| {
                let k0 = *row.keys().next().expect("scales hold at least one coefficient");
                let k1 = *row.keys().next_back().expect("nonempty");
                let mut coeffs = vec![0.0; (k1 - k0 + 1) as usize];
                for (k, v) in row {
                    coeffs[(k - k0) as usize] = v;
                }
                let len = math::pow2(-j);
                ScaleRow { j, inv_len: math::pow2(j), norm: 1.0 / math::sqrt(len), k0, coeffs }
            })
            .collect();
        Synthesis { basis, rows }
    }
}

impl Profile for Synthesis {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        out.fill(0.0);
        let r = self.basis.half_support();
        for row in &self.rows {
            let (u, range) = row.active(x, r);
            for n in range {
                let v = row.coeffs[n];
                if v == 0.0 {
                    continue;
                }
                let d = self.basis.mother_derivs(u - (row.k0 + n as i64) as f64);
                let mut f = v * row.norm;
                for (o, dn) in out.iter_mut().zip(d) {
                    *o += f * dn;
                    f *= row.inv_len;
                }
            }
        }
    }

    fn value(&self, x: f64) -> f64 {
        let r = self.basis.half_support();
        let mut acc = 0.0;
        for row in &self.rows {
            let (u, range) = row.active(x, r);
            let mut part = 0.0;
            for n in range {
                let v = row.coeffs[n];
                if v != 0.0 {
                    part += v * self.basis.mother_value(u - (row.k0 + n as i64) as f64);
                }
            }
            acc += part * row.norm;
        }
        acc
    }

    fn hilbert(&self, x: f64) -> Option<f64> {
        let mut acc = 0.0;
        for row in &self.rows {
            for (n, &v) in row.coeffs.iter().enumerate() {
                if v != 0.0 {
                    acc += v * self.basis.hilbert_psi(&DyadicInterval::new(row.j, row.k0 + n as i64), x);
                }
            }
        }
        Some(acc)
    }
}

/// Wavelet coefficients indexed by dyadic intervals, iterated in (j, k) order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientMap {
    pub window: Option<LagomWindow>,
    entries: BTreeMap<DyadicInterval, f64>,
}

impl CoefficientMap {
    pub fn new() -> Self {
        CoefficientMap::default()
    }

    pub fn with_window(window: LagomWindow) -> Self {
        CoefficientMap { window: Some(window), entries: BTreeMap::new() }
    }

    pub fn single(i: DyadicInterval, value: f64) -> Self {
        let mut m = CoefficientMap::new();
        m.insert(i, value);
        m
    }

    pub fn insert(&mut self, i: DyadicInterval, value: f64) {
        self.entries.insert(i, value);
    }

    /// Coefficient at I (0 when absent).
    pub fn get(&self, i: &DyadicInterval) -> f64 {
        self.entries.get(i).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, i: &DyadicInterval) -> bool {
        self.entries.contains_key(i)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (DyadicInterval, f64)> + '_ {
        self.entries.iter().map(|(i, v)| (*i, *v))
    }

    pub fn keys(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        self.entries.keys().copied()
    }

    /// Σ c_I d_I in (j, k) order.
    pub fn dot(&self, other: &CoefficientMap) -> f64 {
        self.entries.iter().map(|(i, v)| v * other.get(i)).sum()
    }

    /// Coefficient-wise sum; keys are the union.
    pub fn add(&self, other: &CoefficientMap) -> CoefficientMap {
        let mut out = self.clone();
        for (i, v) in other.iter() {
            *out.entries.entry(i).or_insert(0.0) += v;
        }
        out
    }

    pub fn scaled(&self, c: f64) -> CoefficientMap {
        CoefficientMap { window: self.window, entries: self.entries.iter().map(|(i, v)| (*i, v * c)).collect() }
    }

    pub fn l2_norm(&self) -> f64 {
        math::sqrt(self.entries.values().map(|v| v * v).sum())
    }
}

impl FromIterator<(DyadicInterval, f64)> for CoefficientMap {
    fn from_iter<T: IntoIterator<Item = (DyadicInterval, f64)>>(iter: T) -> Self {
        CoefficientMap { window: None, entries: iter.into_iter().collect() }
    }
}

/// P_M (or P_M^⊥ when `complement`) on coefficient maps: keeps I ∈ D_M (or I ∉ D_M).
pub fn project_lagom(c: &CoefficientMap, m: u32, complement: bool) -> Result<CoefficientMap> {
    if m == 0 {
        return Err(arg("lagom projection needs M >= 1"));
    }
    Ok(CoefficientMap {
        window: c.window,
        entries: c.entries.iter().filter(|(i, _)| is_lagom(&i.interval(), m) != complement).map(|(i, v)| (*i, *v)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db6_filter() {
        let h = daubechies_filter(6).unwrap();
        assert_eq!(h.len(), 12);
        assert!((h[0] - 0.11154074335008017).abs() < 1e-12, "{}", h[0]);
        let e: f64 = h.iter().map(|v| v * v).sum();
        assert!((e - 1.0).abs() < 1e-13);
        for m in 1..6 {
            let s: f64 = (0..12 - 2 * m).map(|k| h[k] * h[k + 2 * m]).sum();
            assert!(s.abs() < 1e-13);
        }
    }

    #[test]
    fn haar_filter() {
        let h = daubechies_filter(1).unwrap();
        assert!((h[0] - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }
}
