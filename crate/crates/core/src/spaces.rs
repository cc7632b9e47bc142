//! Wavelet-side BMO and CMO functionals, smooth H¹ atoms and the T(1) ∈ CMO test.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bumps::{self, FnProfile, SampledFunction};
use crate::dyadic::{is_lagom, DyadicInterval, Interval, LagomWindow};
use crate::error::{arg, Error, Result};
use crate::exec::Executor;
use crate::kernels::{CzKernel, SingularityClass};
use crate::math;
use crate::quad;
use crate::wavelets::{project_lagom, CoefficientMap, WaveletBasis};

/// Label written next to BMO/CMO values: the sup over open sets is taken over dyadic Ω only.
pub const SUP_RESTRICTION: &str = "sup over dyadic intervals of the window";

/// sup over window Ω of (|Ω|^{-1} Σ_{I⊆Ω} c_I²)^{1/2}.
pub fn bmo_wavelet_norm(c: &CoefficientMap, window: &LagomWindow) -> f64 {
    let omegas = match window.intervals() {
        Ok(v) => v,
        Err(_) => return f64::NAN,
    };
    let mut best: f64 = 0.0;
    for omega in &omegas {
        let s: f64 = c.iter().filter(|(i, _)| omega.contains(i)).fold(0.0, |acc, (_, v)| acc + v * v);
        best = best.max(s / omega.length());
    }
    math::sqrt(best)
}

/// The same sup restricted to I ∉ D_M.
pub fn cmo_modulus(c: &CoefficientMap, m: u32, window: &LagomWindow) -> Result<f64> {
    Ok(bmo_wavelet_norm(&project_lagom(c, m, true)?, window))
}

/// Dense polynomial, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
struct Poly(Vec<f64>);

impl Poly {
    fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(n, c)| c * n as f64).collect())
    }

    fn eval(&self, y: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * y + c)
    }

    fn add_scaled(&self, other: &Poly, s: f64) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly((0..n).map(|i| self.0.get(i).copied().unwrap_or(0.0) + s * other.0.get(i).copied().unwrap_or(0.0)).collect())
    }
}

/// (1 − 4y²)^8, supported on [−1/2, 1/2].
fn base_bump() -> Poly {
    let mut c = vec![0.0; 17];
    for m in 0..=8 {
        c[2 * m] = math::binomial(8, m) * math::powi(-4.0, m as i32);
    }
    Poly(c)
}

/// The three mean-zero atom shapes: B′, B″ and y·B.
fn shape_polys() -> [Poly; 3] {
    let b = base_bump();
    let d1 = b.derivative();
    let d2 = d1.derivative();
    let mut yb = vec![0.0];
    yb.extend_from_slice(&b.0);
    [d1, d2, Poly(yb)]
}

/// Number of derivatives atom profiles provide.
pub const ATOM_ORDER: usize = 8;

/// Mean-zero smooth atom supported in I with ‖f‖_{p'} = constant · |I|^{-1/p}.
#[derive(Clone, Debug)]
pub struct AtomH1 {
    pub interval: Interval,
    pub profile: SampledFunction,
    /// Dual exponent p' = p/(p − 1).
    pub p_dual: f64,
    /// Weights of (B′, B″, yB).
    pub weights: [f64; 3],
    /// Measured ‖f‖_{p'} |I|^{1/p}.
    pub constant: f64,
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * math::pow2(-53)
}

/// Seeds 0, 1, 2 give the pure shapes B′, B″, yB; larger seeds a ChaCha8 mix of the three.
pub fn atom_weights(seed: u64) -> [f64; 3] {
    match seed {
        0 => [1.0, 0.0, 0.0],
        1 => [0.0, 1.0, 0.0],
        2 => [0.0, 0.0, 1.0],
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            [0; 3].map(|_| 2.0 * unit_f64(&mut rng) - 1.0)
        }
    }
}

/// The atom on I for `seed`, normalized for exponent p ∈ (1, ∞).
pub fn make_atom(i: &Interval, seed: u64, p: f64) -> Result<AtomH1> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(arg(format!("atom exponent must lie in (1, inf), got {p}")));
    }
    let p_dual = p / (p - 1.0);
    let weights = atom_weights(seed);
    let shapes = shape_polys();
    let mut poly = Poly(Vec::new());
    for (w, s) in weights.iter().zip(&shapes) {
        poly = poly.add_scaled(s, *w);
    }
    if poly.0.iter().all(|c| *c == 0.0) {
        return Err(arg("atom weights vanish"));
    }
    let unit = polynomial_function(poly, (-0.5, 0.5), 0.125);
    let norm = unit.lp_norm(p_dual)?;
    let amp = 1.0 / (norm * i.length);
    let profile = unit.translate_dilate(i.center, i.length, f64::INFINITY)?.scaled(amp);
    let constant = profile.lp_norm(p_dual)? * math::pow(i.length, 1.0 / p);
    Ok(AtomH1 { interval: *i, profile, p_dual, weights, constant })
}

fn polynomial_function(poly: Poly, support: (f64, f64), scale: f64) -> SampledFunction {
    let mut derivs = vec![poly];
    for n in 0..ATOM_ORDER {
        let d = derivs[n].derivative();
        derivs.push(d);
    }
    let (a, b) = support;
    SampledFunction::new(
        Arc::new(FnProfile(move |y: f64, out: &mut [f64]| {
            let inside = a <= y && y <= b;
            for (n, o) in out.iter_mut().enumerate() {
                *o = if inside { derivs.get(n).map_or(0.0, |p| p.eval(y)) } else { 0.0 };
            }
        })),
        ATOM_ORDER,
        Some(support),
        scale,
    )
}

/// Default atom family: the three pure shapes on every window interval.
pub fn default_atom_family(window: &LagomWindow, p: f64) -> Result<Vec<AtomH1>> {
    let mut out = Vec::new();
    for i in window.intervals()? {
        for seed in 0..3 {
            out.push(make_atom(&i.interval(), seed, p)?);
        }
    }
    Ok(out)
}

/// Settings of the T(1) ∈ CMO test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmoTestSpec {
    /// The plateau is 𝒯_0 𝒟_{2^k R} Φ.
    pub k: i32,
    /// Nodes per |J| (as 2^level) in the ⟨T(1), ψ_J⟩ and ⟨ψ_J, f⟩ sums.
    pub level: u32,
    /// Absolute tolerance of the adaptive t-integral.
    pub tolerance: f64,
    /// Also evaluate the plateau at k + 1 and extrapolate, assuming the
    /// truncation error scales like 2^{-kδ}.
    pub extrapolate: bool,
}

impl Default for CmoTestSpec {
    fn default() -> Self {
        CmoTestSpec { k: 6, level: 5, tolerance: 1e-11, extrapolate: true }
    }
}

/// T(Φ_big)(x) = ∫ K(t, x) Φ_big(t) dt, splitting off σ(x,x) HΦ_big(x) for pv kernels.
pub fn t1_profile_value(k: &CzKernel, plateau: &SampledFunction, x: f64, tolerance: f64) -> Result<f64> {
    let (a, b) = plateau.support.ok_or_else(|| Error::Unsupported("plateau without compact support".into()))?;
    let func = k.func();
    let mut total = 0.0;
    if k.class == SingularityClass::PvOdd {
        total += func.symbol(x, x) * plateau.hilbert(x)?;
        if func.constant_symbol() {
            return Ok(total);
        }
    }
    let integrand = |t: f64| -> f64 {
        let kv = match k.class {
            SingularityClass::Bounded => func.eval(t, x),
            SingularityClass::PvOdd => func.remainder_t(t, x),
        };
        kv * plateau.value(t)
    };
    // geometric breaks around x resolve the kernel near the diagonal
    let mut breaks = vec![a, b];
    let mut r = 1.0 / 64.0;
    while r < (b - a) {
        for s in [x - r, x + r] {
            if a < s && s < b {
                breaks.push(s);
            }
        }
        r *= 2.0;
    }
    if a < x && x < b {
        breaks.push(x);
    }
    breaks.sort_by(|p, q| p.total_cmp(q));
    breaks.dedup();
    total += quad::adaptive_pieces(&integrand, &breaks, tolerance, 20_000)?;
    Ok(total)
}

/// Coefficients ⟨T(1), ψ_J⟩ on the window, with T(1) realized through the big plateau.
pub fn t1_coefficients(k: &CzKernel, basis: &WaveletBasis, window: &LagomWindow, spec: &CmoTestSpec, exec: &dyn Executor) -> Result<CoefficientMap> {
    let near = plateau_coefficients(k, basis, window, spec.k, spec, exec)?;
    if !spec.extrapolate {
        return Ok(near);
    }
    let far = plateau_coefficients(k, basis, window, spec.k + 1, spec, exec)?;
    let r = math::pow(2.0, -k.delta);
    let mut out = CoefficientMap::with_window(*window);
    for (i, v) in far.iter() {
        out.insert(i, v + (v - near.get(&i)) * r / (1.0 - r));
    }
    Ok(out)
}

fn plateau_coefficients(k: &CzKernel, basis: &WaveletBasis, window: &LagomWindow, scale: i32, spec: &CmoTestSpec, exec: &dyn Executor) -> Result<CoefficientMap> {
    let ivs = window.intervals()?;
    let lambda = math::pow2(scale) * window.radius;
    let plateau = bumps::cutoff_with_hilbert().translate_dilate(0.0, lambda, f64::INFINITY)?;
    // every scale grid is a subset of the finest one
    let fine = math::pow2(-(window.j_max + spec.level as i32));
    let mut keys: BTreeMap<i64, usize> = BTreeMap::new();
    for i in &ivs {
        let step = i.length() * math::pow2(-(spec.level as i32));
        let (a, b) = basis.support(i);
        let (lo, hi) = quad::aligned_range(a, b, step);
        let ratio = math::round(step / fine) as i64;
        for m in lo..=hi {
            let n = keys.len();
            keys.entry(m * ratio).or_insert(n);
        }
    }
    let nodes: Vec<i64> = keys.keys().copied().collect();
    let vals = exec.map(nodes.len(), &|n| t1_profile_value(k, &plateau, nodes[n] as f64 * fine, spec.tolerance).unwrap_or(f64::NAN));
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature("T(1) profile evaluation failed".into()));
    }
    let lookup: BTreeMap<i64, f64> = nodes.iter().copied().zip(vals).collect();
    let mut out = CoefficientMap::with_window(*window);
    for i in &ivs {
        let step = i.length() * math::pow2(-(spec.level as i32));
        let (a, b) = basis.support(i);
        let (lo, hi) = quad::aligned_range(a, b, step);
        let ratio = math::round(step / fine) as i64;
        let s: f64 = (lo..=hi).map(|m| lookup[&(m * ratio)] * basis.psi_value(i, m as f64 * step)).sum();
        out.insert(*i, s * step);
    }
    Ok(out)
}

/// ⟨ψ_J, f⟩ on the common support at 2^{-level} min(|J|, f.scale).
fn psi_pairing(basis: &WaveletBasis, j: &DyadicInterval, f: &SampledFunction, level: u32) -> f64 {
    let (mut a, mut b) = basis.support(j);
    if let Some((fa, fb)) = f.support {
        a = a.max(fa);
        b = b.min(fb);
    }
    if a >= b {
        return 0.0;
    }
    let step = quad::pow2_floor(j.length().min(f.scale)) * math::pow2(-(level as i32));
    quad::grid_sum(&|x| f.value(x) * basis.psi_value(j, x), a, b, step)
}

/// One row of the T(1) ∈ CMO table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CmoTestRow {
    pub m: u32,
    /// sup over the atoms of |⟨P_M^⊥ T(1), f⟩|.
    pub sup: f64,
    pub nonincreasing: bool,
}

/// For each M, sup over the atom family of |Σ_{J∉D_M} ⟨T(1), ψ_J⟩ ⟨ψ_J, f⟩|.
pub fn t1_in_cmo_test(t1: &CoefficientMap, basis: &WaveletBasis, atoms: &[AtomH1], ms: &[u32], level: u32, exec: &dyn Executor) -> Result<Vec<CmoTestRow>> {
    for a in atoms {
        let mean = a.profile.integral()?;
        if mean.abs() > 1e-10 * a.constant.max(1.0) / a.interval.length {
            return Err(Error::Precondition(format!("atom on {:?} is not mean zero ({mean:e})", a.interval)));
        }
    }
    let ivs: Vec<DyadicInterval> = t1.keys().collect();
    let nj = ivs.len();
    // ⟨ψ_J, f⟩ for every atom and J, row per atom
    let mut pairs = vec![0.0; atoms.len() * nj];
    exec.fill_rows(&mut pairs, nj, &|r, row| {
        for (slot, j) in row.iter_mut().zip(&ivs) {
            *slot = psi_pairing(basis, j, &atoms[r].profile, level);
        }
    });
    let mut rows: Vec<CmoTestRow> = Vec::new();
    for &m in ms {
        if m == 0 {
            return Err(arg("M must be at least 1"));
        }
        let keep: Vec<bool> = ivs.iter().map(|j| !is_lagom(&j.interval(), m)).collect();
        let mut sup: f64 = 0.0;
        for r in 0..atoms.len() {
            let s: f64 = (0..nj).filter(|&c| keep[c]).map(|c| t1.get(&ivs[c]) * pairs[r * nj + c]).sum();
            sup = sup.max(s.abs());
        }
        let nonincreasing = rows.last().map_or(true, |p| sup <= p.sup * (1.0 + 1e-9) + 1e-15);
        rows.push(CmoTestRow { m, sup, nonincreasing });
    }
    Ok(rows)
}
