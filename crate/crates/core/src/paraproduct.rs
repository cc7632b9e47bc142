//! The compact paraproduct ⟨T_b f, g⟩ = Σ_I ⟨b,ψ_I⟩⟨f,φ_I⟩⟨g,ψ_I⟩: coefficient
//! action, kernel realization and compactness hooks.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bumps::{self, SampledFunction};
use crate::dyadic::{DyadicInterval, Interval, LagomWindow};
use crate::error::{arg, pre, Error, Result};
use crate::exec::{Executor, Sequential};
use crate::kernels::{CzKernel, KernelFn, SampleSpec, SingularityClass};
use crate::math;
use crate::operators::{tail_norm, CoefficientMatrix};
use crate::quad;
use crate::spaces::bmo_wavelet_norm;
use crate::wavelets::{project_lagom, BasisParams, CoefficientMap, WaveletBasis};

/// Default window of the builtin paraproducts.
pub fn default_window() -> LagomWindow {
    LagomWindow::default()
}

/// A paraproduct with its b-coefficients on a window.
#[derive(Clone, Debug)]
pub struct Paraproduct {
    /// Label of b (builtin spec or "coefficients").
    pub b_name: String,
    pub b: CoefficientMap,
    pub basis: WaveletBasis,
    pub window: LagomWindow,
    /// Scales carrying coefficients, for the kernel sum.
    scales: Vec<i32>,
}

/// e^{-x²} cos(3x) Φ(x/4): smooth, supported in [−8, 8], equal to e^{-x²} cos(3x) on [−4, 4].
pub fn gauss_cos() -> SampledFunction {
    SampledFunction::from_jet(
        |x| {
            let e = (x * x).scale(-1.0).exp();
            e * x.scale(3.0).cos() * bumps::cutoff_jet(x.scale(0.25))
        },
        8,
        Some((-8.0, 8.0)),
        0.25,
    )
}

/// The builtin bump b(x) = Φ(x/2): 1 on [−2, 2], 0 outside [−4, 4].
pub fn bump_b() -> SampledFunction {
    bumps::cutoff().translate_dilate(0.0, 2.0, f64::INFINITY).expect("positive")
}

impl Paraproduct {
    pub fn new(b_name: impl Into<String>, b: CoefficientMap, basis: WaveletBasis, window: LagomWindow) -> Result<Self> {
        if b.iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite("paraproduct coefficient".into()));
        }
        let mut scales: Vec<i32> = b.keys().map(|i| i.j).collect();
        scales.sort_unstable();
        scales.dedup();
        Ok(Paraproduct { b_name: b_name.into(), b, basis, window, scales })
    }

    /// b coefficients of a function on the window.
    pub fn from_function(b_name: impl Into<String>, b: &SampledFunction, basis: WaveletBasis, window: LagomWindow, exec: &dyn Executor) -> Result<Self> {
        let coeffs = basis.analyze(b, &window, exec)?;
        Paraproduct::new(b_name, coeffs, basis, window)
    }

    /// `gauss_cos`, `bump`, `zero` or `single_wavelet:j,k` on the default basis and window.
    pub fn builtin(spec: &str) -> Result<Self> {
        Paraproduct::builtin_on(spec, WaveletBasis::new(BasisParams::default())?, default_window(), &Sequential)
    }

    pub fn builtin_on(spec: &str, basis: WaveletBasis, window: LagomWindow, exec: &dyn Executor) -> Result<Self> {
        let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
        match (name, params) {
            ("gauss_cos", "") => Paraproduct::from_function(spec, &gauss_cos(), basis, window, exec),
            ("bump", "") => Paraproduct::from_function(spec, &bump_b(), basis, window, exec),
            ("zero", "") => Paraproduct::new(spec, CoefficientMap::with_window(window), basis, window),
            ("single_wavelet", p) => {
                let (j, k) = p.split_once(',').ok_or_else(|| arg("single_wavelet needs j,k"))?;
                let j: i32 = j.trim().parse().map_err(|_| arg(format!("bad scale index {j:?}")))?;
                let k: i64 = k.trim().parse().map_err(|_| arg(format!("bad position index {k:?}")))?;
                let mut c = CoefficientMap::with_window(window);
                c.insert(DyadicInterval::new(j, k), 1.0);
                Paraproduct::new(spec, c, basis, window)
            }
            _ => Err(Error::Unknown { kind: "paraproduct symbol", name: spec.into() }),
        }
    }

    /// Smallest |t − x| at which the window-truncated kernel is trusted.
    pub fn kernel_floor(&self) -> f64 {
        math::pow2(-(self.window.j_max + 2))
    }

    /// Σ_I b_I φ_I(t) ψ_I(x), no floor check.
    pub fn kernel_sum(&self, t: f64, x: f64) -> f64 {
        let mut acc = 0.0;
        for &j in &self.scales {
            // φ_I lives on I, so only the interval holding t contributes
            let i = DyadicInterval::containing(t, j);
            for cand in [i, DyadicInterval::new(j, i.k - 1)] {
                let b = self.b.get(&cand);
                if b != 0.0 {
                    let p = self.basis.phi_value(&cand, t);
                    if p != 0.0 {
                        acc += b * p * self.basis.psi_value(&cand, x);
                    }
                }
            }
        }
        acc
    }

    /// K(t, x) with the truncation floor enforced.
    pub fn kernel_eval(&self, t: f64, x: f64) -> Result<f64> {
        if (t - x).abs() < self.kernel_floor() {
            return Err(pre(format!("|t - x| below the kernel floor {}", self.kernel_floor())));
        }
        Ok(self.kernel_sum(t, x))
    }

    /// The kernel as a bounded-class [`CzKernel`] with δ = 1.
    pub fn kernel(&self) -> Result<CzKernel> {
        let scale = self.b.iter().fold(0.0, |m: f64, (_, v)| m.max(v.abs()));
        let constant = if scale > 0.0 { scale } else { 1.0 };
        CzKernel::new("paraproduct", self.b_name.clone(), 1.0, constant, SingularityClass::Bounded, Arc::new(ParaproductKernel(self.clone())))
    }

    /// ⟨f, φ_I⟩.
    pub fn phi_pairing(&self, f: &SampledFunction, i: &DyadicInterval) -> Result<f64> {
        let (mut a, mut b) = (i.left(), i.right());
        if let Some((fa, fb)) = f.support {
            a = a.max(fa);
            b = b.min(fb);
        }
        if a >= b {
            return Ok(0.0);
        }
        let step = quad::pow2_floor(i.length().min(f.scale)) * math::pow2(-(self.basis.params().coeff_level as i32));
        let v = quad::grid_sum(&|x| f.value(x) * self.basis.phi_value(i, x), a, b, step);
        if !v.is_finite() {
            return Err(Error::Quadrature("non-finite companion pairing".into()));
        }
        Ok(v)
    }

    /// ⟨T_b f, g⟩ through the coefficient sum, in (j, k) order.
    pub fn pair(&self, f: &SampledFunction, g: &SampledFunction) -> Result<PairValue> {
        let mut value = 0.0;
        let mut edge = 0.0;
        let (jlo, jhi) = (self.window.j_min, self.window.j_max);
        for (i, b) in self.b.iter() {
            if b == 0.0 {
                continue;
            }
            let gi = self.basis.coeff(g, &i)?;
            if gi == 0.0 {
                continue;
            }
            let term = b * self.phi_pairing(f, &i)? * gi;
            value += term;
            if i.j == jlo || i.j == jhi {
                edge += term.abs();
            }
        }
        Ok(PairValue { value, truncation: edge })
    }

    /// A[I₁][I₂] = ⟨T_b ψ_{I₁}, ψ_{I₂}⟩ = b_{I₂} ⟨ψ_{I₁}, φ_{I₂}⟩ under exact orthonormality.
    pub fn coefficient_matrix(&self, exec: &dyn Executor) -> Result<CoefficientMatrix> {
        let ivs = self.window.intervals()?;
        let n = ivs.len();
        let key = format!("paraproduct;b={};window={},{:?},{},{}", self.b_name, self.window.m, self.window.radius, self.window.j_min, self.window.j_max);
        let kernel = format!("paraproduct:{}", self.b_name);
        let mut a = CoefficientMatrix::zeros(ivs.clone(), kernel, key);
        let gram = companion_gram(&self.basis, &ivs, exec);
        let mut vals = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                vals[r * n + c] = self.b.get(&ivs[c]) * gram[r * n + c];
            }
        }
        for (r, c) in (0..n).flat_map(|r| (0..n).map(move |c| (r, c))) {
            a.extension[r * n + c] = {
                let (p0, p1) = self.basis.support(&ivs[r]);
                let (q0, q1) = self.basis.support(&ivs[c]);
                p0.max(q0) < p1.min(q1)
            };
        }
        a.values = vals;
        if a.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("paraproduct matrix entry".into()));
        }
        Ok(a)
    }

    /// The plateau equal to 1 on every wavelet support of the window.
    pub fn window_one(&self) -> Result<SampledFunction> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in self.window.intervals()? {
            let (a, b) = self.basis.support(&i);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        let reach = lo.abs().max(hi.abs());
        Ok(bumps::cutoff_on(&Interval { center: 0.0, length: reach }))
    }
}

/// G[r][c] = ⟨ψ_{I_r}, φ_{I_c}⟩, row-major.
pub fn companion_gram(basis: &WaveletBasis, ivs: &[DyadicInterval], exec: &dyn Executor) -> Vec<f64> {
    let n = ivs.len();
    let level = basis.params().coeff_level as i32;
    let mut vals = vec![0.0; n * n];
    exec.fill_rows(&mut vals, n, &|r, row| {
        let i1 = ivs[r];
        let (s0, s1) = basis.support(&i1);
        for (slot, i2) in row.iter_mut().zip(ivs) {
            let (a0, a1) = (s0.max(i2.left()), s1.min(i2.right()));
            if a0 >= a1 {
                continue;
            }
            let step = i1.length().min(i2.length()) * math::pow2(-level);
            *slot = quad::grid_sum(&|x| basis.psi_value(&i1, x) * basis.phi_value(i2, x), a0, a1, step);
        }
    });
    vals
}

/// A − Π_β − Π*_γ with β = T(1) and γ = T*(1) coefficients: the part of T with
/// T(1) = T*(1) = 0, so the off-diagonal decay estimates apply.
pub fn cancellation_reduced(a: &CoefficientMatrix, t1: &CoefficientMap, t1_adjoint: &CoefficientMap, basis: &WaveletBasis, exec: &dyn Executor) -> Result<CoefficientMatrix> {
    let n = a.n();
    let gram = companion_gram(basis, &a.intervals, exec);
    let mut out = a.clone();
    out.kernel = format!("{}-reduced", a.kernel);
    for r in 0..n {
        for c in 0..n {
            let beta = t1.get(&a.intervals[c]) * gram[r * n + c];
            let gamma = t1_adjoint.get(&a.intervals[r]) * gram[c * n + r];
            out.values[r * n + c] -= beta + gamma;
        }
    }
    if out.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("reduced matrix entry".into()));
    }
    Ok(out)
}

/// Value of a truncated sum and the size of its edge-scale terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairValue {
    pub value: f64,
    pub truncation: f64,
}

struct ParaproductKernel(Paraproduct);

impl KernelFn for ParaproductKernel {
    fn eval(&self, t: f64, x: f64) -> f64 {
        self.0.kernel_sum(t, x)
    }
}

/// Regime of a kernel smoothness sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// |t − x| > 2^M.
    FarApart,
    /// |t + x| > M 2^{M+1}.
    FarOut,
    /// |t − x| < 2^{-M}.
    Close,
}

/// Largest quotient per regime and the fitted constant.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport {
    pub m: u32,
    /// ‖P_M^⊥ b‖ in the wavelet BMO norm plus 2^{-M}.
    pub scale: f64,
    pub max_quotient: [f64; 3],
    pub samples: [usize; 3],
    pub constant: f64,
}

/// |K(t,x) − K(t',x)| |t−x|² / |t−t'| over samples in the three regimes, against ‖P_M^⊥ b‖ + 2^{-M}.
pub fn kernel_smoothness_check(p: &Paraproduct, spec: &SampleSpec, m: u32) -> Result<SmoothnessReport> {
    if m == 0 {
        return Err(arg("smoothness check needs M >= 1"));
    }
    let tail = project_lagom(&p.b, m, true)?;
    let scale = bmo_wavelet_norm(&tail, &p.window) + math::pow2(-(m as i32));
    let big = math::pow2(m as i32);
    let floor = p.kernel_floor();
    let mut max_q = [0.0f64; 3];
    let mut counts = [0usize; 3];
    for n in 0..spec.count {
        let h: [f64; 3] = quad::halton(n as u64 + 1);
        for (r, regime) in [Regime::FarApart, Regime::FarOut, Regime::Close].into_iter().enumerate() {
            let (t, x) = match regime {
                Regime::FarApart => {
                    let d = big * (1.0 + 3.0 * h[0]);
                    let c = (h[1] - 0.5) * 2.0 * big;
                    (c + d / 2.0, c - d / 2.0)
                }
                Regime::FarOut => {
                    let s = m as f64 * math::pow2(m as i32 + 1) * (1.0 + h[0]);
                    let d = floor * 4.0 + h[1] * big;
                    ((s + d) / 2.0, (s - d) / 2.0)
                }
                Regime::Close => {
                    let d = floor * 2.0 + h[0] * (math::pow2(-(m as i32)) - floor * 2.0).max(0.0);
                    let c = (h[1] - 0.5) * p.window.radius;
                    (c + d / 2.0, c - d / 2.0)
                }
            };
            let d = (t - x).abs();
            let tp = t + (h[2] - 0.5) * d;
            if (tp - t).abs() == 0.0 || (tp - x).abs() < floor || d < floor {
                continue;
            }
            let q = (p.kernel_sum(t, x) - p.kernel_sum(tp, x)).abs() * d * d / (t - tp).abs();
            max_q[r] = max_q[r].max(q);
            counts[r] += 1;
        }
    }
    let worst = max_q.iter().fold(0.0f64, |a, b| a.max(*b));
    Ok(SmoothnessReport { m, scale, max_quotient: max_q, samples: counts, constant: worst / scale })
}

/// Tail norms of T_b next to the BMO norms of P_M^⊥ b.
#[derive(Clone, Debug, PartialEq)]
pub struct ParaproductCompactness {
    pub tail_norms: Vec<(u32, f64)>,
    pub b_tails: Vec<(u32, f64)>,
    /// max τ(M)/‖P_M^⊥ b‖ over the M with a nonzero b tail.
    pub constant: f64,
    /// τ(M) ≤ C ‖P_M^⊥ b‖ for every M (zero tails must give zero τ).
    pub holds: bool,
    pub matrix: CoefficientMatrix,
}

/// Builds the matrix from the triple-product formula and compares tail norms with b tails.
pub fn paraproduct_compactness(p: &Paraproduct, ms: &[u32], exec: &dyn Executor) -> Result<ParaproductCompactness> {
    let a = p.coefficient_matrix(exec)?;
    let mut tail_norms = Vec::new();
    let mut b_tails = Vec::new();
    for &m in ms {
        tail_norms.push((m, tail_norm(&a, m)?));
        b_tails.push((m, bmo_wavelet_norm(&project_lagom(&p.b, m, true)?, &p.window)));
    }
    let mut constant: f64 = 0.0;
    for ((_, t), (_, b)) in tail_norms.iter().zip(&b_tails) {
        if *b > 0.0 {
            constant = constant.max(t / b);
        }
    }
    let holds = tail_norms.iter().zip(&b_tails).all(|((_, t), (_, b))| if *b > 0.0 { *t <= constant * b * (1.0 + 1e-12) } else { *t <= 1e-12 });
    Ok(ParaproductCompactness { tail_norms, b_tails, constant, holds, matrix: a })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_cos_values() {
        let f = gauss_cos();
        for x in [-1.3, 0.0, 0.4, 2.0] {
            let want = math::exp(-x * x) * math::cos(3.0 * x);
            assert!((f.value(x) - want).abs() < 1e-14);
        }
        let d = f.derivative(1, 0.4).unwrap();
        let want = math::exp(-0.16) * (-0.8 * math::cos(1.2) - 3.0 * math::sin(1.2));
        assert!((d - want).abs() < 1e-13);
    }
}
