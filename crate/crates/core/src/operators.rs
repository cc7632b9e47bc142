//! Operator side: wavelet matrices ⟨Tψ_I, ψ_J⟩, spectral and tail norms,
//! the weak compactness scan, the decay and necessity bound checks, and the
//! T(1) functional.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::admissible::FBound;
use crate::bumps::{self, SampledFunction};
use crate::dyadic::{diam_union, ec, is_lagom, rdist, DyadicInterval, Interval, LagomWindow};
use crate::error::{arg, pre, Error, Result};
use crate::exec::Executor;
use crate::kernels::{CzKernel, SingularityClass};
use crate::math;
use crate::quad;
use crate::wavelets::WaveletBasis;

/// Quadrature settings; part of every cache key.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Trapezoid nodes per |I| (as 2^level) for the regular part of wavelet pairings.
    pub regular_level: u32,
    /// Upper bound on the node spacing, for kernels with features of fixed size.
    pub kernel_step: f64,
    /// Nodes per |I| (as 2^level) on the singular line integrals of pv kernels.
    pub singular_level: u32,
    /// Nodes per feature length (as 2^level) for pairings of general functions.
    pub function_level: u32,
    /// Tolerance of the per-entry refinement check on overlapping pv pairs.
    pub entry_tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { regular_level: 4, kernel_step: 0.125, singular_level: 8, function_level: 6, entry_tolerance: 1e-6 }
    }
}

impl QuadratureSpec {
    /// Canonical text used in cache keys.
    pub fn key(&self) -> String {
        format!(
            "regular_level={};kernel_step={:?};singular_level={};function_level={};entry_tolerance={:?}",
            self.regular_level, self.kernel_step, self.singular_level, self.function_level, self.entry_tolerance
        )
    }

    fn wavelet_step(&self, len: f64) -> f64 {
        (len * math::pow2(-(self.regular_level as i32))).min(quad::pow2_floor(self.kernel_step))
    }

    fn function_step(&self, scale: f64) -> f64 {
        (quad::pow2_floor(scale) * math::pow2(-(self.function_level as i32))).min(quad::pow2_floor(self.kernel_step))
    }
}

/// Dense matrix A[I][J] = ⟨Tψ_I, ψ_J⟩; rows are inputs I, columns outputs J.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    pub intervals: Vec<DyadicInterval>,
    /// Row-major, `n × n`.
    pub values: Vec<f64>,
    /// Entries whose supports overlap, so the value relies on the pv or continuity extension.
    pub extension: Vec<bool>,
    /// Entries that failed the refinement check.
    pub flagged: Vec<(usize, usize)>,
    pub kernel: String,
    /// Canonical description of everything the values depend on.
    pub spec_key: String,
}

impl CoefficientMatrix {
    pub fn zeros(intervals: Vec<DyadicInterval>, kernel: impl Into<String>, spec_key: impl Into<String>) -> Self {
        let n = intervals.len();
        CoefficientMatrix {
            intervals,
            values: vec![0.0; n * n],
            extension: vec![false; n * n],
            flagged: Vec::new(),
            kernel: kernel.into(),
            spec_key: spec_key.into(),
        }
    }

    pub fn n(&self) -> usize {
        self.intervals.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let n = self.n();
        self.values[i * n + j] = v;
    }

    pub fn index_of(&self, i: &DyadicInterval) -> Option<usize> {
        self.intervals.binary_search(i).ok()
    }

    pub fn entry(&self, i: &DyadicInterval, j: &DyadicInterval) -> Option<f64> {
        Some(self.get(self.index_of(i)?, self.index_of(j)?))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Column indices with J ∉ D_M.
    pub fn tail_columns(&self, m: u32) -> Vec<usize> {
        (0..self.n()).filter(|&j| !is_lagom(&self.intervals[j].interval(), m)).collect()
    }
}

/// Largest singular value of the `n × n` row-major matrix restricted to the columns `cols`:
/// the square root of the top eigenvalue of the Gram block B = AᵀA, found by
/// Householder reduction to tridiagonal form and Sturm-count bisection.
fn spectral_norm(values: &[f64], n: usize, cols: &[usize]) -> Result<f64> {
    if cols.is_empty() || n == 0 {
        return Ok(0.0);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entry".into()));
    }
    let m = cols.len();
    let mut b = vec![0.0; m * m];
    for i in 0..n {
        let row = &values[i * n..(i + 1) * n];
        for (p, &cp) in cols.iter().enumerate() {
            let x = row[cp];
            if x == 0.0 {
                continue;
            }
            for (q, &cq) in cols.iter().enumerate().skip(p) {
                b[p * m + q] += x * row[cq];
            }
        }
    }
    for p in 0..m {
        for q in 0..p {
            b[p * m + q] = b[q * m + p];
        }
    }
    let (d, e) = tridiagonalize(b, m);
    Ok(math::sqrt(top_eigenvalue(&d, &e).max(0.0)))
}

/// Householder reduction of a symmetric matrix; returns the diagonal and the
/// subdiagonal (e[0] unused).
fn tridiagonalize(mut a: Vec<f64>, m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut e = vec![0.0; m];
    let mut u = vec![0.0; m];
    let mut w = vec![0.0; m];
    for k in (1..m).rev() {
        // reflect row k onto its last off-diagonal entry (k, k-1)
        let scale: f64 = (0..k).map(|j| a[k * m + j].abs()).sum();
        if scale == 0.0 {
            e[k] = 0.0;
            continue;
        }
        for j in 0..k {
            u[j] = a[k * m + j] / scale;
        }
        let sigma: f64 = u[..k].iter().map(|x| x * x).sum();
        let alpha = if u[k - 1] >= 0.0 { -math::sqrt(sigma) } else { math::sqrt(sigma) };
        e[k] = scale * alpha;
        let h = sigma - u[k - 1] * alpha;
        u[k - 1] -= alpha;
        // A' = (I − uuᵀ/h) A (I − uuᵀ/h) on the leading k × k block
        for i in 0..k {
            w[i] = (0..k).map(|j| a[i * m + j] * u[j]).sum::<f64>() / h;
        }
        let kappa = (0..k).map(|i| u[i] * w[i]).sum::<f64>() / (2.0 * h);
        for i in 0..k {
            w[i] -= kappa * u[i];
        }
        for i in 0..k {
            for j in 0..=i {
                let v = a[i * m + j] - u[i] * w[j] - w[i] * u[j];
                a[i * m + j] = v;
                a[j * m + i] = v;
            }
        }
    }
    let d = (0..m).map(|i| a[i * m + i]).collect();
    (d, e)
}

/// Number of eigenvalues of the tridiagonal matrix below x.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i] * e[i] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn top_eigenvalue(d: &[f64], e: &[f64]) -> f64 {
    let m = d.len();
    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = e[i].abs() + if i + 1 < m { e[i + 1].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    if hi <= lo {
        return hi;
    }
    let width = hi - lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE * width) {
            break;
        }
        if sturm_count(d, e, mid) == m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest singular value of the whole matrix.
pub fn op_norm(a: &CoefficientMatrix) -> Result<f64> {
    let cols: Vec<usize> = (0..a.n()).collect();
    spectral_norm(&a.values, a.n(), &cols)
}

/// ‖P_M^⊥ ∘ T‖ on the window: the norm of A restricted to output columns J ∉ D_M.
pub fn tail_norm(a: &CoefficientMatrix, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(arg("tail norm needs M >= 1"));
    }
    spectral_norm(&a.values, a.n(), &a.tail_columns(m))
}

/// Samples of one wavelet on its scale grid.
struct Sampled {
    index: usize,
    offset: usize,
    values: Vec<f64>,
}

/// Shared grid of one scale: nodes `(lo + n) * step`.
struct ScaleGrid {
    step: f64,
    lo: i64,
    len: usize,
    members: Vec<Sampled>,
}

impl ScaleGrid {
    fn build(basis: &WaveletBasis, intervals: &[DyadicInterval], indices: &[usize], step: f64) -> ScaleGrid {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for &i in indices {
            let (a, b) = basis.support(&intervals[i]);
            let (l, h) = quad::aligned_range(a, b, step);
            lo = lo.min(l);
            hi = hi.max(h);
        }
        let members = indices
            .iter()
            .map(|&i| {
                let iv = intervals[i];
                let (a, b) = basis.support(&iv);
                let (l, h) = quad::aligned_range(a, b, step);
                let values = (l..=h).map(|m| basis.psi_value(&iv, m as f64 * step)).collect();
                Sampled { index: i, offset: (l - lo) as usize, values }
            })
            .collect();
        ScaleGrid { step, lo, len: (hi - lo + 1) as usize, members }
    }

    fn node(&self, n: usize) -> f64 {
        (self.lo + n as i64) as f64 * self.step
    }
}

fn overlaps(basis: &WaveletBasis, i: &DyadicInterval, j: &DyadicInterval) -> bool {
    let (a0, a1) = basis.support(i);
    let (b0, b1) = basis.support(j);
    a0.max(b0) < a1.min(b1)
}

/// Canonical key of an assembly: kernel, window, basis and quadrature.
pub fn assembly_key(k: &CzKernel, basis: &WaveletBasis, window: &LagomWindow, q: &QuadratureSpec) -> String {
    let p = basis.params();
    format!(
        "kernel={};delta={:?};class={};window={},{:?},{},{};basis=db{},{},{},{},{:?};{}",
        k.id(),
        k.delta,
        k.class.as_str(),
        window.m,
        window.radius,
        window.j_min,
        window.j_max,
        p.vanishing_moments,
        p.table_level,
        p.hilbert_level,
        p.coeff_level,
        p.tau_orth,
        q.key()
    )
}

/// Assembles A[I][J] = ⟨Tψ_I, ψ_J⟩ over the window.
pub fn assemble(k: &CzKernel, basis: &WaveletBasis, window: &LagomWindow, q: &QuadratureSpec, exec: &dyn Executor) -> Result<CoefficientMatrix> {
    let intervals = window.intervals()?;
    let key = assembly_key(k, basis, window, q);
    let mut a = CoefficientMatrix::zeros(intervals.clone(), k.id(), key);
    let n = intervals.len();
    if n == 0 {
        return Ok(a);
    }
    for i in 0..n {
        for j in 0..n {
            a.extension[i * n + j] = overlaps(basis, &intervals[i], &intervals[j]);
        }
    }
    let mut scales: Vec<i32> = intervals.iter().map(|i| i.j).collect();
    scales.dedup();
    let grids: Vec<ScaleGrid> = scales
        .iter()
        .map(|&j| {
            let idx: Vec<usize> = (0..n).filter(|&i| intervals[i].j == j).collect();
            ScaleGrid::build(basis, &intervals, &idx, q.wavelet_step(math::pow2(-j)))
        })
        .collect();
    let func = k.func().clone();
    let regular_needed = !(k.class == SingularityClass::PvOdd && func.constant_symbol());
    for (gi, g1) in grids.iter().enumerate() {
        for (gj, g2) in grids.iter().enumerate() {
            if !regular_needed {
                continue;
            }
            // |I| ≥ |J| splits off σ(x,x)/(t−x); otherwise σ(t,t)/(t−x)
            let coarse_input = scales[gi] <= scales[gj];
            let kern = |t: f64, x: f64| -> f64 {
                match k.class {
                    SingularityClass::Bounded => func.eval(t, x),
                    SingularityClass::PvOdd if coarse_input => func.remainder_t(t, x),
                    SingularityClass::PvOdd => func.remainder_x(t, x),
                }
            };
            let nj = g2.members.len();
            let mut w = vec![0.0; g1.len * nj];
            exec.fill_rows(&mut w, nj, &|row, out| {
                let t = g1.node(row);
                let krow: Vec<f64> = (0..g2.len).map(|c| kern(t, g2.node(c))).collect();
                for (slot, mem) in out.iter_mut().zip(&g2.members) {
                    let seg = &krow[mem.offset..mem.offset + mem.values.len()];
                    *slot = seg.iter().zip(&mem.values).map(|(x, y)| x * y).sum::<f64>() * g2.step;
                }
            });
            for mi in &g1.members {
                for (jj, mj) in g2.members.iter().enumerate() {
                    let mut acc = 0.0;
                    for (m, v) in mi.values.iter().enumerate() {
                        acc += v * w[(mi.offset + m) * nj + jj];
                    }
                    a.values[mi.index * n + mj.index] += acc * g1.step;
                }
            }
        }
    }
    if k.class == SingularityClass::PvOdd {
        let rows = exec_rows(exec, n, &|i, out: &mut [f64]| {
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = singular_part(k, basis, &intervals[i], &intervals[j], q, q.singular_level);
            }
        });
        for (v, s) in a.values.iter_mut().zip(&rows) {
            *v += s;
        }
        // refinement check on overlapping pairs: halve the singular grid
        if q.singular_level > 1 {
            for i in 0..n {
                for j in 0..n {
                    if a.extension[i * n + j] {
                        let coarse = singular_part(k, basis, &intervals[i], &intervals[j], q, q.singular_level - 1);
                        if (coarse - rows[i * n + j]).abs() > q.entry_tolerance * (1.0 + rows[i * n + j].abs()) {
                            a.flagged.push((i, j));
                        }
                    }
                }
            }
        }
    }
    if let Some(p) = a.values.iter().position(|v| !v.is_finite()) {
        let (i, j) = (p / n, p % n);
        return Err(Error::NonFinite(format!("matrix entry ({}, {}) x ({}, {})", intervals[i].j, intervals[i].k, intervals[j].j, intervals[j].k)));
    }
    Ok(a)
}

fn exec_rows(exec: &dyn Executor, n: usize, f: &(dyn Fn(usize, &mut [f64]) + Sync)) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    exec.fill_rows(&mut out, n, f);
    out
}

/// The singular line integral of a pv pair at the given grid level.
fn singular_part(k: &CzKernel, basis: &WaveletBasis, i: &DyadicInterval, j: &DyadicInterval, q: &QuadratureSpec, level: u32) -> f64 {
    let func = k.func();
    let far_level = q.regular_level.min(level);
    let reach = basis.half_support() + 8.0;
    if i.j <= j.j {
        // ∫ ψ_J(x) σ(x,x) Hψ_I(x) dx on ψ_J's grid
        let (a, b) = basis.support(j);
        let far = ((a - i.center()) / i.length()).abs().min(((b - i.center()) / i.length()).abs()) > reach && !(a < i.center() && i.center() < b);
        let step = j.length() * math::pow2(-((if far { far_level } else { level }) as i32));
        quad::grid_sum(
            &|x| {
                basis.psi_value(j, x) * func.symbol(x, x) * basis.hilbert_psi(i, x)
            },
            a,
            b,
            step,
        )
    } else {
        // −∫ ψ_I(t) σ(t,t) Hψ_J(t) dt on ψ_I's grid
        let (a, b) = basis.support(i);
        let far = ((a - j.center()) / j.length()).abs().min(((b - j.center()) / j.length()).abs()) > reach && !(a < j.center() && j.center() < b);
        let step = i.length() * math::pow2(-((if far { far_level } else { level }) as i32));
        -quad::grid_sum(&|t| basis.psi_value(i, t) * func.symbol(t, t) * basis.hilbert_psi(j, t), a, b, step)
    }
}

/// ⟨Tψ_I, ψ_J⟩ for one pair, with the same rules as [`assemble`].
pub fn dual_pair(k: &CzKernel, basis: &WaveletBasis, i: &DyadicInterval, j: &DyadicInterval, q: &QuadratureSpec) -> Result<f64> {
    let func = k.func();
    let coarse_input = i.j <= j.j;
    let mut total = 0.0;
    if !(k.class == SingularityClass::PvOdd && func.constant_symbol()) {
        let si = q.wavelet_step(i.length());
        let sj = q.wavelet_step(j.length());
        let (a0, a1) = basis.support(i);
        let (b0, b1) = basis.support(j);
        let (tl, th) = quad::aligned_range(a0, a1, si);
        let (xl, xh) = quad::aligned_range(b0, b1, sj);
        let psi_j: Vec<f64> = (xl..=xh).map(|m| basis.psi_value(j, m as f64 * sj)).collect();
        for mt in tl..=th {
            let t = mt as f64 * si;
            let mut row = 0.0;
            for (c, mx) in (xl..=xh).enumerate() {
                let x = mx as f64 * sj;
                let kv = match k.class {
                    SingularityClass::Bounded => func.eval(t, x),
                    SingularityClass::PvOdd if coarse_input => func.remainder_t(t, x),
                    SingularityClass::PvOdd => func.remainder_x(t, x),
                };
                row += kv * psi_j[c];
            }
            total += basis.psi_value(i, t) * row * sj * si;
        }
    }
    if k.class == SingularityClass::PvOdd {
        total += singular_part(k, basis, i, j, q, q.singular_level);
    }
    if !total.is_finite() {
        return Err(Error::Quadrature(format!("non-finite pairing ({}, {}) x ({}, {})", i.j, i.k, j.j, j.k)));
    }
    Ok(total)
}

/// ∬ f(t) g(x) K(t, x) dt dx for compactly supported f (input) and g (output).
pub fn pair_functions(k: &CzKernel, f: &SampledFunction, g: &SampledFunction, q: &QuadratureSpec) -> Result<f64> {
    let (fa, fb) = f.support.ok_or_else(|| pre("input function needs compact support"))?;
    let (ga, gb) = g.support.ok_or_else(|| pre("output function needs compact support"))?;
    let func = k.func();
    let coarse_input = f.scale >= g.scale;
    let mut total = 0.0;
    if !(k.class == SingularityClass::PvOdd && func.constant_symbol()) {
        let st = q.function_step(f.scale);
        let sx = q.function_step(g.scale);
        let (tl, th) = quad::aligned_range(fa, fb, st);
        let (xl, xh) = quad::aligned_range(ga, gb, sx);
        let gv: Vec<(f64, f64)> = (xl..=xh).map(|m| m as f64 * sx).map(|x| (x, g.value(x))).filter(|p| p.1 != 0.0).collect();
        for mt in tl..=th {
            let t = mt as f64 * st;
            let fv = f.value(t);
            if fv == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for &(x, gx) in &gv {
                let kv = match k.class {
                    SingularityClass::Bounded => func.eval(t, x),
                    SingularityClass::PvOdd if coarse_input => func.remainder_t(t, x),
                    SingularityClass::PvOdd => func.remainder_x(t, x),
                };
                row += kv * gx;
            }
            total += fv * row;
        }
        total *= st * sx;
    }
    if k.class == SingularityClass::PvOdd {
        let lv = -(q.singular_level as i32);
        if coarse_input {
            let step = quad::pow2_floor(g.scale) * math::pow2(lv);
            let mut acc = 0.0;
            let (l, h) = quad::aligned_range(ga, gb, step);
            for m in l..=h {
                let x = m as f64 * step;
                let gx = g.value(x);
                if gx != 0.0 {
                    acc += gx * func.symbol(x, x) * f.hilbert(x)?;
                }
            }
            total += acc * step;
        } else {
            let step = quad::pow2_floor(f.scale) * math::pow2(lv);
            let mut acc = 0.0;
            let (l, h) = quad::aligned_range(fa, fb, step);
            for m in l..=h {
                let t = m as f64 * step;
                let ft = f.value(t);
                if ft != 0.0 {
                    acc += ft * func.symbol(t, t) * g.hilbert(t)?;
                }
            }
            total -= acc * step;
        }
    }
    if !total.is_finite() {
        return Err(Error::Quadrature("non-finite function pairing".into()));
    }
    Ok(total)
}

/// One row of the weak compactness table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakResidual {
    pub interval: DyadicInterval,
    /// max |⟨Tφ, φ̃⟩| over the (plateau, wavelet) pairings on I.
    pub residual: f64,
}

/// Output of [`weak_compactness_scan`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeakCompactnessFit {
    pub epsilon: f64,
    /// Empirical stand-in for M_{T,ε}.
    pub m: u32,
    pub constant: f64,
    pub family: &'static str,
    pub residuals: Vec<WeakResidual>,
}

/// Family label written to reports.
pub const WEAK_FAMILY: &str = "L2-normalized plateau |I|^-1/2 Phi_I and wavelet psi_I, all four pairings";

/// Residuals |⟨Tφ_I, φ̃_I⟩| over the canonical family and the smallest M with
/// residual ≤ C (F_W(I;M) + ε) for every window I ∉ D_M.
pub fn weak_compactness_scan(
    k: &CzKernel,
    basis: &WaveletBasis,
    window: &LagomWindow,
    fb: &FBound,
    eps: f64,
    q: &QuadratureSpec,
    exec: &dyn Executor,
) -> Result<WeakCompactnessFit> {
    weak_compactness_scan_by(&|f, g| pair_functions(k, f, g, q), basis, window, fb, eps, exec)
}

/// [`weak_compactness_scan`] with the bilinear form ⟨Tf, g⟩ supplied directly.
pub fn weak_compactness_scan_by(
    pairing: &(dyn Fn(&SampledFunction, &SampledFunction) -> Result<f64> + Sync),
    basis: &WaveletBasis,
    window: &LagomWindow,
    fb: &FBound,
    eps: f64,
    exec: &dyn Executor,
) -> Result<WeakCompactnessFit> {
    if !(eps > 0.0) {
        return Err(arg("weak scan needs eps > 0"));
    }
    let ivs = window.intervals()?;
    let plateau_base = bumps::cutoff_with_hilbert();
    let vals = exec.map(ivs.len(), &|n| {
        let i = ivs[n];
        let psi = basis.psi(&i);
        let plateau = plateau_base.translate_dilate(i.center(), i.length(), 2.0).expect("positive length");
        let pairs = [(&plateau, &plateau), (&plateau, &psi), (&psi, &plateau), (&psi, &psi)];
        let mut worst: f64 = 0.0;
        for (f, g) in pairs {
            match pairing(f, g) {
                Ok(v) => worst = worst.max(v.abs()),
                Err(_) => return f64::NAN,
            }
        }
        worst
    });
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature("weak compactness pairing failed".into()));
    }
    let residuals: Vec<WeakResidual> = ivs.iter().zip(&vals).map(|(i, r)| WeakResidual { interval: *i, residual: *r }).collect();
    let constant = vals.iter().fold(0.0, |m: f64, v| m.max(*v));
    let mut found = None;
    for m in 1..=64u32 {
        let ok = residuals.iter().all(|r| {
            let iv = r.interval.interval();
            is_lagom(&iv, m) || r.residual <= constant * (fb.f_w(&iv, m) + eps)
        });
        if ok {
            found = Some(m);
            break;
        }
    }
    let m = found.ok_or(Error::NoConvergence { what: "weak compactness M search", iterations: 64 })?;
    Ok(WeakCompactnessFit { epsilon: eps, m, constant, family: WEAK_FAMILY, residuals })
}

/// Parameters of the decay bound check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParameters {
    pub theta: f64,
    /// Hölder exponent δ of the kernel.
    pub delta: f64,
    pub n: usize,
    /// Lagom parameter used in F(I₁, …, I₆; M).
    pub m: u32,
}

impl BoundParameters {
    pub fn new(theta: f64, delta: f64, n: usize, m: u32) -> Result<Self> {
        let p = BoundParameters { theta, delta, n, m };
        if !(theta > 0.0 && theta < 1.0) {
            return Err(arg("theta must be in (0, 1)"));
        }
        if !(p.delta_prime() > 0.0) {
            return Err(arg(format!("delta' = delta - theta(1 + delta) must be positive, got {}", p.delta_prime())));
        }
        if m == 0 {
            return Err(arg("M must be at least 1"));
        }
        Ok(p)
    }

    /// δ' = δ − θ(1 + δ).
    pub fn delta_prime(&self) -> f64 {
        self.delta - self.theta * (1.0 + self.delta)
    }

    /// I₁..I₆ for the pair (I, J).
    pub fn six_intervals(&self, i: &Interval, j: &Interval) -> [Interval; 6] {
        let hull = i.hull(j);
        let (kmax, kmin) = if i.length >= j.length { (i, j) } else { (j, i) };
        let diam = diam_union(i, j);
        let lambda1 = diam / kmax.length;
        let lambda2 = math::pow(diam / kmin.length, self.theta);
        // the larger interval moved onto the center of the smaller one
        let recentered = Interval { center: kmin.center, length: kmax.length };
        [*i, *j, hull, recentered.dilate(lambda1), recentered.dilate(lambda2), kmin.dilate(lambda2)]
    }
}

/// Output of [`prop47_bound_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundFit {
    pub constant: f64,
    pub worst: Option<(DyadicInterval, DyadicInterval)>,
}

/// max over pairs of |A[I,J]| rdist^{1+δ'} / (ec^{1/2+δ'} (F(I₁..I₆; M) + ε)).
pub fn prop47_bound_check(a: &CoefficientMatrix, params: &BoundParameters, fb: &FBound, eps: f64) -> Result<BoundFit> {
    if !(eps > 0.0) {
        return Err(arg("bound check needs eps > 0"));
    }
    let dp = params.delta_prime();
    let n = a.n();
    let mut best = BoundFit { constant: 0.0, worst: None };
    for i in 0..n {
        let ii = a.intervals[i].interval();
        for j in 0..n {
            let v = a.get(i, j).abs();
            if v == 0.0 {
                continue;
            }
            let jj = a.intervals[j].interval();
            let six = params.six_intervals(&ii, &jj);
            let f = fb.f_joint(&six, params.m);
            let ratio = v * math::pow(rdist(&ii, &jj), 1.0 + dp) / (math::pow(ec(&ii, &jj), 0.5 + dp) * (f + eps));
            if ratio > best.constant {
                best = BoundFit { constant: ratio, worst: Some((a.intervals[i], a.intervals[j])) };
            }
        }
    }
    Ok(best)
}

/// Output of [`necessity_bound_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NecessityFit {
    pub alpha: f64,
    pub tail_norm: f64,
    pub constant: f64,
    /// Re-check of every diagonal entry at the fitted constant.
    pub holds: bool,
}

/// Weight (1+|I|/2^M)^{-α} (1+2^{-M}/|I|)^{-α} (1+rdist(I,B_{2^M})/M)^{-N}.
pub fn necessity_weight(i: &Interval, alpha: f64, m: u32, n: usize) -> f64 {
    let big = math::pow2(m as i32);
    math::pow(1.0 + i.length / big, -alpha)
        * math::pow(1.0 + 1.0 / (big * i.length), -alpha)
        * math::pow(1.0 + rdist(i, &Interval::ball(big)) / m as f64, -(n as f64))
}

/// Fits C in |A[I,I]| ≤ C·weight(I) + tail_norm(A, M) over the window diagonal.
pub fn necessity_bound_check(a: &CoefficientMatrix, p: f64, m: u32, n: usize) -> Result<NecessityFit> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(arg("necessity check needs 1 < p < infinity"));
    }
    let alpha = (0.5 - 1.0 / p).abs() + 0.5;
    let tail = tail_norm(a, m)?;
    let mut constant: f64 = 0.0;
    for i in 0..a.n() {
        let w = necessity_weight(&a.intervals[i].interval(), alpha, m, n);
        let excess = (a.get(i, i).abs() - tail).max(0.0);
        if excess > 0.0 {
            constant = constant.max(excess / w);
        }
    }
    let holds = (0..a.n()).all(|i| {
        let w = necessity_weight(&a.intervals[i].interval(), alpha, m, n);
        a.get(i, i).abs() <= constant * w * (1.0 + 1e-12) + tail
    });
    Ok(NecessityFit { alpha, tail_norm: tail, constant, holds })
}

/// One row of the T(1) convergence table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct T1Value {
    pub k: i32,
    pub value: f64,
    pub error_bound: f64,
}

/// F_K(I) from the kernel's triple, or 1 without one.
fn kernel_envelope(k: &CzKernel, i: &Interval) -> f64 {
    match &k.triple {
        Some(t) => t.product(i.length, i.length, rdist(i, &Interval::ball(1.0))),
        None => 1.0,
    }
}

/// ∫ |f| over its support.
fn l1_norm(f: &SampledFunction) -> Result<f64> {
    f.lp_norm(1.0)
}

/// ⟨T(𝒯_a 𝒟_{2^k|I|} Φ), f⟩ and the error bound C 2^{-kδ} F_K(2^k I) ‖f‖₁.
pub fn t1_functional(kern: &CzKernel, f: &SampledFunction, i: &Interval, k: i32, a: f64, constant: f64, q: &QuadratureSpec) -> Result<T1Value> {
    if math::pow2(k) < 1.0 + (a - i.center).abs() / i.length {
        return Err(pre(format!("T(1) needs 2^k >= 1 + |a - c(I)|/|I| (k = {k})")));
    }
    let (fa, fb) = f.support.ok_or_else(|| pre("T(1) test function needs compact support"))?;
    if fa < i.left() - 1e-12 * i.length || fb > i.right() + 1e-12 * i.length {
        return Err(pre("T(1) test function must be supported in I"));
    }
    let l1 = l1_norm(f)?;
    let mean = f.integral()?;
    if mean.abs() > 1e-10 * l1.max(1.0) {
        return Err(pre(format!("T(1) test function must have mean zero, got {mean:e}")));
    }
    let lambda = math::pow2(k) * i.length;
    let big = bumps::cutoff_with_hilbert().translate_dilate(a, lambda, f64::INFINITY)?;
    let value = pair_functions(kern, &big, f, q)?;
    let dilated = Interval { center: i.center, length: math::pow2(k) * i.length };
    let error_bound = constant * math::pow(2.0, -(k as f64) * kern.delta) * kernel_envelope(kern, &dilated) * l1;
    Ok(T1Value { k, value, error_bound })
}

/// The T(1) table for k in `ks`.
pub fn t1_table(kern: &CzKernel, f: &SampledFunction, i: &Interval, a: f64, ks: core::ops::RangeInclusive<i32>, constant: f64, q: &QuadratureSpec) -> Result<Vec<T1Value>> {
    ks.map(|k| t1_functional(kern, f, i, k, a, constant, q)).collect()
}

/// Richardson limit of the last two table values with ratio 2^{-δ}.
pub fn t1_limit(table: &[T1Value], delta: f64) -> Result<f64> {
    let n = table.len();
    if n < 2 {
        return Err(pre("T(1) limit needs at least two table rows"));
    }
    let r = math::pow(2.0, -delta);
    let (v0, v1) = (table[n - 2].value, table[n - 1].value);
    Ok(v1 + (v1 - v0) * r / (1.0 - r))
}

/// Least-squares slope of ln|value(k+1) − value(k)| against k, over the nonzero steps.
pub fn t1_decay_slope(table: &[T1Value]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = table
        .windows(2)
        .filter_map(|w| {
            let d = (w[1].value - w[0].value).abs();
            (d > 0.0).then(|| (w[0].k as f64, math::ln(d)))
        })
        .collect();
    if pts.len() < 2 {
        return Err(pre("decay slope needs at least two nonzero table steps"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Smallest C with |value(k+1) − value(k)| ≤ C 2^{-kδ} F_K(2^k I) ‖f‖₁ over the table.
pub fn t1_calibrate(kern: &CzKernel, table: &[T1Value], f: &SampledFunction, i: &Interval) -> Result<f64> {
    let l1 = l1_norm(f)?;
    let mut c: f64 = 0.0;
    for w in table.windows(2) {
        let k = w[0].k;
        let dilated = Interval { center: i.center, length: math::pow2(k) * i.length };
        let shape = math::pow(2.0, -(k as f64) * kern.delta) * kernel_envelope(kern, &dilated) * l1;
        let diff = (w[1].value - w[0].value).abs();
        if diff > 0.0 {
            if shape == 0.0 {
                return Err(Error::NonFinite("T(1) calibration against a vanishing envelope".into()));
            }
            c = c.max(diff / shape);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64]) -> CoefficientMatrix {
        let ivs: Vec<DyadicInterval> = (0..vals.len() as i64).map(|k| DyadicInterval::new(0, k)).collect();
        let mut a = CoefficientMatrix::zeros(ivs, "test", "");
        for (i, v) in vals.iter().enumerate() {
            a.set(i, i, *v);
        }
        a
    }

    #[test]
    fn op_norm_examples() {
        assert_eq!(op_norm(&diag(&[0.0, 0.0])).unwrap(), 0.0);
        assert!((op_norm(&diag(&[3.0, 4.0])).unwrap() - 4.0).abs() < 1e-14);
        let mut a = diag(&[0.0, 0.0, 0.0]);
        a.set(0, 2, 1.0);
        assert!((op_norm(&a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_prime() {
        let p = BoundParameters::new(0.1, 1.0, 6, 4).unwrap();
        assert!((p.delta_prime() - 0.8).abs() < 1e-15);
        assert!(BoundParameters::new(0.6, 1.0, 6, 4).is_err());
    }

    #[test]
    fn necessity_alpha() {
        let a = diag(&[1.0]);
        assert_eq!(necessity_bound_check(&a, 2.0, 1, 6).unwrap().alpha, 0.5);
    }
}
