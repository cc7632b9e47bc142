//! Bump functions: sampled profiles with derivatives, the fixed cutoff Φ,
//! translation/dilation, cutoff constructions and pairing decay checks.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dyadic::{diam_union, ec, rdist, Interval};
use crate::error::{arg, pre, Error, Result};
use crate::hilbert::HilbertTable;
use crate::jet::{Jet, JET_LEN};
use crate::math;
use crate::quad;

/// A scalar function with derivatives.
pub trait Profile: Send + Sync {
    /// Writes f^{(n)}(x) into `out[n]` for every `n < out.len()`.
    fn derivs(&self, x: f64, out: &mut [f64]);

    fn value(&self, x: f64) -> f64 {
        let mut o = [0.0];
        self.derivs(x, &mut o);
        o[0]
    }

    /// pv ∫ f(s) / (s − x) ds, when the profile knows it cheaply.
    fn hilbert(&self, _x: f64) -> Option<f64> {
        None
    }
}

/// Profile built from a closure filling derivatives.
pub struct FnProfile<F>(pub F);

impl<F: Fn(f64, &mut [f64]) + Send + Sync> Profile for FnProfile<F> {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        (self.0)(x, out)
    }
}

/// Profile evaluated through jets; derivatives up to order 8.
pub struct JetProfile<F>(pub F);

impl<F: Fn(Jet) -> Jet + Send + Sync> Profile for JetProfile<F> {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        let j = (self.0)(Jet::variable(x, out.len().min(JET_LEN)));
        for (n, o) in out.iter_mut().enumerate() {
            *o = if n < JET_LEN { j.derivative(n) } else { f64::NAN };
        }
    }
}

/// Immutable function handle with declared derivative order and support.
#[derive(Clone)]
pub struct SampledFunction {
    profile: Arc<dyn Profile>,
    /// Highest derivative order the profile provides.
    pub order: usize,
    /// Closed support, when compact.
    pub support: Option<(f64, f64)>,
    /// Length scale of the finest feature; drives quadrature spacing.
    pub scale: f64,
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledFunction")
            .field("order", &self.order)
            .field("support", &self.support)
            .field("scale", &self.scale)
            .finish()
    }
}

impl SampledFunction {
    pub fn new(profile: Arc<dyn Profile>, order: usize, support: Option<(f64, f64)>, scale: f64) -> Self {
        SampledFunction { profile, order, support, scale }
    }

    pub fn from_fn<F>(f: F, order: usize, support: Option<(f64, f64)>, scale: f64) -> Self
    where
        F: Fn(f64, &mut [f64]) + Send + Sync + 'static,
    {
        SampledFunction::new(Arc::new(FnProfile(f)), order, support, scale)
    }

    pub fn from_jet<F>(f: F, order: usize, support: Option<(f64, f64)>, scale: f64) -> Self
    where
        F: Fn(Jet) -> Jet + Send + Sync + 'static,
    {
        SampledFunction::new(Arc::new(JetProfile(f)), order.min(JET_LEN - 1), support, scale)
    }

    pub fn zero() -> Self {
        SampledFunction::from_fn(|_, out: &mut [f64]| out.fill(0.0), usize::MAX, Some((0.0, 0.0)), 1.0)
    }

    pub fn profile(&self) -> &Arc<dyn Profile> {
        &self.profile
    }

    pub fn value(&self, x: f64) -> f64 {
        if let Some((a, b)) = self.support {
            if x < a || x > b {
                return 0.0;
            }
        }
        self.profile.value(x)
    }

    /// Derivatives `0..out.len()`; errors past the declared order.
    pub fn derivs(&self, x: f64, out: &mut [f64]) -> Result<()> {
        if out.len() > self.order.saturating_add(1) {
            return Err(Error::MissingDerivatives { needed: out.len() - 1, available: self.order });
        }
        if let Some((a, b)) = self.support {
            if x < a || x > b {
                out.fill(0.0);
                return Ok(());
            }
        }
        self.profile.derivs(x, out);
        Ok(())
    }

    pub fn derivative(&self, n: usize, x: f64) -> Result<f64> {
        let mut out = vec![0.0; n + 1];
        self.derivs(x, &mut out)?;
        Ok(out[n])
    }

    /// λ^{-1/p} f((x − a)/λ); `p = ∞` gives the plain dilation.
    pub fn translate_dilate(&self, a: f64, lambda: f64, p: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(arg(format!("dilation needs lambda > 0, got {lambda}")));
        }
        if !(p > 0.0) {
            return Err(arg(format!("normalization exponent must be positive, got {p}")));
        }
        let amp = if p.is_infinite() { 1.0 } else { math::pow(lambda, -1.0 / p) };
        Ok(SampledFunction {
            profile: Arc::new(Affine { inner: self.profile.clone(), shift: a, lambda, amp }),
            order: self.order,
            support: self.support.map(|(lo, hi)| (a + lambda * lo, a + lambda * hi)),
            scale: self.scale * lambda,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        SampledFunction {
            profile: Arc::new(Affine { inner: self.profile.clone(), shift: 0.0, lambda: 1.0, amp: c }),
            ..self.clone()
        }
    }

    /// Pointwise product (Leibniz rule for derivatives).
    pub fn mul(&self, other: &SampledFunction) -> Self {
        let support = match (self.support, other.support) {
            (Some((a, b)), Some((c, d))) => Some((a.max(c), b.min(d).max(a.max(c)))),
            (Some(s), None) | (None, Some(s)) => Some(s),
            (None, None) => None,
        };
        SampledFunction {
            profile: Arc::new(Product(self.profile.clone(), other.profile.clone())),
            order: self.order.min(other.order),
            support,
            scale: self.scale.min(other.scale),
        }
    }

    /// Σ c_i f_i.
    pub fn linear_combination(terms: &[(f64, SampledFunction)]) -> Self {
        if terms.is_empty() {
            return SampledFunction::zero();
        }
        let order = terms.iter().map(|t| t.1.order).min().unwrap_or(0);
        let scale = terms.iter().map(|t| t.1.scale).fold(f64::INFINITY, f64::min);
        let support = terms.iter().try_fold((f64::INFINITY, f64::NEG_INFINITY), |acc, t| {
            t.1.support.map(|(a, b)| (acc.0.min(a), acc.1.max(b)))
        });
        let parts = terms.iter().map(|(c, f)| (*c, f.clone())).collect();
        SampledFunction { profile: Arc::new(Combination(parts)), order, support, scale }
    }

    pub fn sub(&self, other: &SampledFunction) -> Self {
        SampledFunction::linear_combination(&[(1.0, self.clone()), (-1.0, other.clone())])
    }

    /// pv ∫ f(s)/(s − x) ds; falls back to adaptive quadrature of the odd part.
    pub fn hilbert(&self, x: f64) -> Result<f64> {
        if let Some(h) = self.profile.hilbert(x) {
            return Ok(h);
        }
        let (a, b) = self
            .support
            .ok_or_else(|| Error::Unsupported("Hilbert transform of a function without compact support".into()))?;
        let reach = (x - a).abs().max((b - x).abs());
        let odd = |u: f64| {
            if u == 0.0 {
                2.0 * self.derivative(1, x).unwrap_or(0.0)
            } else {
                (self.value(x + u) - self.value(x - u)) / u
            }
        };
        let mut breaks = vec![0.0];
        let mut edge = self.scale;
        while edge < reach {
            breaks.push(edge);
            edge *= 2.0;
        }
        breaks.push(reach);
        quad::adaptive_pieces(&odd, &breaks, 1e-12, 4000)
    }

    /// ∫ f over its support, on the aligned grid (f must vanish smoothly at the ends).
    pub fn integral(&self) -> Result<f64> {
        let (a, b) = self.support.ok_or_else(|| pre("integral needs compact support"))?;
        let step = quad::pow2_floor(self.scale) * math::pow2(-10);
        Ok(quad::grid_sum(&|x| self.value(x), a, b, step))
    }

    /// ∫ f over [a, b] by composite Gauss–Legendre.
    pub fn integral_over(&self, a: f64, b: f64) -> f64 {
        let cells = (((b - a) / self.scale * 16.0) as usize).clamp(16, 1 << 16);
        let rule = quad::gauss_legendre(16);
        quad::composite_gl(&|x| self.value(x), a, b, cells, &rule)
    }

    /// (∫|f|^p)^{1/p} over the support (p = ∞ gives the sup on the grid).
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        let (a, b) = self.support.ok_or_else(|| pre("norm needs compact support"))?;
        let step = quad::pow2_floor(self.scale) * math::pow2(-10);
        if p.is_infinite() {
            let (lo, hi) = quad::aligned_range(a, b, step);
            return Ok((lo..=hi).map(|m| self.value(m as f64 * step).abs()).fold(0.0, f64::max));
        }
        let s = quad::grid_sum(&|x| math::pow(self.value(x).abs(), p), a, b, step);
        Ok(math::pow(s, 1.0 / p))
    }
}

struct Affine {
    inner: Arc<dyn Profile>,
    shift: f64,
    lambda: f64,
    amp: f64,
}

impl Profile for Affine {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        self.inner.derivs((x - self.shift) / self.lambda, out);
        let mut factor = self.amp;
        for o in out.iter_mut() {
            *o *= factor;
            factor /= self.lambda;
        }
    }

    fn hilbert(&self, x: f64) -> Option<f64> {
        self.inner.hilbert((x - self.shift) / self.lambda).map(|h| h * self.amp)
    }
}

struct Product(Arc<dyn Profile>, Arc<dyn Profile>);

impl Profile for Product {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        let n = out.len();
        let mut a = [0.0; JET_LEN + 8];
        let mut b = [0.0; JET_LEN + 8];
        self.0.derivs(x, &mut a[..n]);
        self.1.derivs(x, &mut b[..n]);
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..=k {
                acc += math::binomial(k, i) * a[i] * b[k - i];
            }
            *o = acc;
        }
    }
}

struct Combination(Vec<(f64, SampledFunction)>);

impl Profile for Combination {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        let n = out.len();
        out.fill(0.0);
        let mut tmp = [0.0; JET_LEN + 8];
        for (c, f) in &self.0 {
            if f.derivs(x, &mut tmp[..n]).is_err() {
                out.fill(f64::NAN);
                return;
            }
            for (o, t) in out.iter_mut().zip(&tmp[..n]) {
                *o += c * t;
            }
        }
    }

    fn hilbert(&self, x: f64) -> Option<f64> {
        let mut acc = 0.0;
        for (c, f) in &self.0 {
            acc += c * f.profile.hilbert(x)?;
        }
        Some(acc)
    }
}

/// e^{-1/u} for u > 0, else 0.
fn smooth_step(u: Jet) -> Jet {
    if u.value() <= 0.0 {
        Jet::constant(0.0, u.len())
    } else {
        (-(u.recip())).exp()
    }
}

/// The cutoff Φ on a jet: 1 on |x| ≤ 1, 0 on |x| ≥ 2, C^∞ in between.
pub fn cutoff_jet(x: Jet) -> Jet {
    let ax = if x.value() < 0.0 { -x } else { x };
    let a = ax.value();
    if a <= 1.0 {
        return Jet::constant(1.0, x.len());
    }
    if a >= 2.0 {
        return Jet::constant(0.0, x.len());
    }
    let up = smooth_step(2.0 - ax);
    let down = smooth_step(ax + -1.0);
    up / (up + down)
}

/// Value-only fast path for Φ.
pub fn cutoff_value(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let up = math::exp(-1.0 / (2.0 - a));
        let down = math::exp(-1.0 / (a - 1.0));
        up / (up + down)
    }
}

/// ∫Φ; the glue is antisymmetric about 3/2, so the transition contributes exactly 1/2 per side.
pub const CUTOFF_INTEGRAL: f64 = 3.0;

struct Cutoff;

impl Profile for Cutoff {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        if out.len() == 1 {
            out[0] = cutoff_value(x);
            return;
        }
        let j = cutoff_jet(Jet::variable(x, out.len().min(JET_LEN)));
        for (n, o) in out.iter_mut().enumerate() {
            *o = j.derivative(n);
        }
    }
}

/// The fixed cutoff Φ with derivatives to order 8.
pub fn cutoff() -> SampledFunction {
    SampledFunction::new(Arc::new(Cutoff), JET_LEN - 1, Some((-2.0, 2.0)), 1.0)
}

/// Φ_J = 𝒯_{c(J)} 𝒟_{|J|} Φ: 1 on 2J, 0 outside 4J.
pub fn cutoff_on(j: &Interval) -> SampledFunction {
    cutoff().translate_dilate(j.center, j.length, f64::INFINITY).expect("positive length")
}

struct WithHilbert {
    inner: Arc<dyn Profile>,
    table: HilbertTable,
}

impl Profile for WithHilbert {
    fn derivs(&self, x: f64, out: &mut [f64]) {
        self.inner.derivs(x, out)
    }

    fn hilbert(&self, x: f64) -> Option<f64> {
        Some(self.table.eval(x))
    }
}

/// Attaches a tabulated Hilbert transform (grid step 2^{-level}) to a compactly supported f.
pub fn with_hilbert_table(f: &SampledFunction, level: u32) -> Result<SampledFunction> {
    let (a, b) = f.support.ok_or_else(|| pre("Hilbert table needs compact support"))?;
    if f.order < 2 {
        return Err(Error::MissingDerivatives { needed: 2, available: f.order });
    }
    let h = math::pow2(-(level as i32));
    let (lo, hi) = quad::aligned_range(a, b, h);
    let n = (hi - lo + 1).max(0) as usize;
    let (mut v, mut d1, mut d2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut out = [0.0; 3];
    for i in 0..n {
        f.derivs((lo + i as i64) as f64 * h, &mut out)?;
        v[i] = out[0];
        d1[i] = out[1];
        d2[i] = out[2];
    }
    let pad = 4.0 * (b - a);
    let table = HilbertTable::from_samples(h, lo, &v, &d1, &d2, pad);
    Ok(SampledFunction { profile: Arc::new(WithHilbert { inner: f.profile.clone(), table }), ..f.clone() })
}

/// Φ with its Hilbert transform tabulated at step 2^{-10}.
pub fn cutoff_with_hilbert() -> SampledFunction {
    with_hilbert_table(&cutoff(), 10).expect("cutoff is compact and smooth")
}

/// e^{-x²} with derivatives to order 8 (Hermite recurrence).
pub fn gaussian() -> SampledFunction {
    SampledFunction::from_fn(
        |x, out: &mut [f64]| {
            let g = math::exp(-x * x);
            // d^n e^{-x²} = (-1)^n H_n(x) e^{-x²}
            let (mut h0, mut h1) = (1.0, 2.0 * x);
            for (n, o) in out.iter_mut().enumerate() {
                let hn = match n {
                    0 => h0,
                    1 => h1,
                    _ => {
                        let h2 = 2.0 * x * h1 - 2.0 * (n - 1) as f64 * h0;
                        h0 = h1;
                        h1 = h2;
                        h2
                    }
                };
                *o = if n % 2 == 0 { hn * g } else { -hn * g };
            }
        },
        usize::MAX,
        None,
        0.5,
    )
}

/// Sampling grid for sup-type constants, in units of |I| around c(I).
#[derive(Clone, Copy, Debug)]
pub struct AdaptednessGrid {
    pub radius: f64,
    pub per_unit: usize,
}

impl Default for AdaptednessGrid {
    fn default() -> Self {
        AdaptednessGrid { radius: 64.0, per_unit: 512 }
    }
}

/// Smallest C with |f^{(n)}(x)| ≤ C |I|^{-1/p-n} w_I(x)^{-N} on the grid, n ≤ N.
pub fn adaptedness_constant(f: &SampledFunction, i: &Interval, p: f64, n: usize) -> Result<f64> {
    adaptedness_constant_on(f, i, p, n, AdaptednessGrid::default())
}

pub fn adaptedness_constant_on(f: &SampledFunction, i: &Interval, p: f64, n: usize, grid: AdaptednessGrid) -> Result<f64> {
    if f.order < n {
        return Err(Error::MissingDerivatives { needed: n, available: f.order });
    }
    let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
    let steps = (grid.radius * grid.per_unit as f64) as i64;
    let (mut lo, mut hi) = (-steps, steps);
    if let Some((a, b)) = f.support {
        let ua = math::floor((a - i.center) / i.length * grid.per_unit as f64) as i64;
        let ub = math::ceil((b - i.center) / i.length * grid.per_unit as f64) as i64;
        lo = lo.max(ua);
        hi = hi.min(ub);
    }
    let scale: Vec<f64> = (0..=n).map(|k| math::pow(i.length, inv_p + k as f64)).collect();
    let mut out = vec![0.0; n + 1];
    let mut best: f64 = 0.0;
    for m in lo..=hi {
        let u = m as f64 / grid.per_unit as f64;
        let x = i.center + u * i.length;
        f.derivs(x, &mut out)?;
        let w = math::powi(1.0 + u.abs(), n as i32);
        for k in 0..=n {
            let v = out[k].abs() * scale[k] * w;
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("derivative {k} at {x}")));
            }
            best = best.max(v);
        }
    }
    Ok(best)
}

fn same_length(a: &Interval, b: &Interval) -> bool {
    (a.length - b.length).abs() <= 1e-12 * a.length.max(b.length)
}

/// f · Φ_{λJ}, for |J| = |I|.
pub fn inner_cutoff(f: &SampledFunction, i: &Interval, j: &Interval, lambda: f64) -> Result<SampledFunction> {
    if !same_length(i, j) {
        return Err(pre(format!("inner cutoff needs |I| = |J|, got {} and {}", i.length, j.length)));
    }
    if !(lambda > 0.0) {
        return Err(arg("inner cutoff needs lambda > 0"));
    }
    Ok(f.mul(&cutoff_on(&j.dilate(lambda))))
}

/// Upper bound C_f (1 + 1/λ)^N for the inner cutoff.
pub fn inner_cutoff_bound(c_f: f64, lambda: f64, n: usize) -> f64 {
    c_f * math::powi(1.0 + 1.0 / lambda, n as i32)
}

/// Dilation factor (1/32)(diam(I ∪ J)/|J|)^θ of the outer cutoff.
pub fn outer_cutoff_lambda(i: &Interval, j: &Interval, theta: f64) -> f64 {
    math::pow(diam_union(i, j) / j.length, theta) / 32.0
}

/// f · (1 − Φ_{λJ}) with the outer-cutoff λ, for |J| ≤ |I|.
pub fn outer_cutoff(f: &SampledFunction, i: &Interval, j: &Interval, theta: f64) -> Result<SampledFunction> {
    if j.length > i.length * (1.0 + 1e-12) {
        return Err(pre("outer cutoff needs |J| <= |I|"));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(arg("outer cutoff needs 0 < theta < 1"));
    }
    let lambda = outer_cutoff_lambda(i, j, theta);
    let phi = cutoff_on(&j.dilate(lambda));
    let one_minus = SampledFunction::from_fn(
        move |x, out: &mut [f64]| {
            phi.derivs(x, out).expect("cutoff order");
            for o in out.iter_mut() {
                *o = -*o;
            }
            out[0] += 1.0;
        },
        JET_LEN - 1,
        None,
        j.length * lambda,
    );
    Ok(f.mul(&one_minus))
}

/// Gain (|J|/|I|)^{θN/2 − 1/2} rdist(I,J)^{−θN/2} of the outer cutoff.
pub fn outer_cutoff_gain(i: &Interval, j: &Interval, theta: f64, n: usize) -> f64 {
    let e = theta * n as f64 / 2.0;
    math::pow(j.length / i.length, e - 0.5) * math::pow(rdist(i, j), -e)
}

/// Smallest admissible plateau dilation R^{-1}(diam(I ∪ J)/|J|)^θ.
pub fn plateau_min_lambda(i: &Interval, j: &Interval, theta: f64, r: f64) -> f64 {
    math::pow(diam_union(i, j) / j.length, theta) / r
}

/// |λJ|^{-1/2} Φ_{λJ}, for |J| ≤ |I| and λ above the plateau threshold with R = 3.
pub fn plateau_bump(i: &Interval, j: &Interval, theta: f64, lambda: f64) -> Result<SampledFunction> {
    if j.length > i.length * (1.0 + 1e-12) {
        return Err(pre("plateau bump needs |J| <= |I|"));
    }
    if lambda < plateau_min_lambda(i, j, theta, 3.0) * (1.0 - 1e-12) {
        return Err(pre(format!("plateau bump needs lambda >= {}", plateau_min_lambda(i, j, theta, 3.0))));
    }
    let big = j.dilate(lambda);
    Ok(cutoff_on(&big).scaled(1.0 / math::sqrt(big.length)))
}

/// R^{2N} (|J|/|I|)^{θN/4 − 1/2} λ^{(N−1)/2}.
pub fn plateau_bound(i: &Interval, j: &Interval, theta: f64, lambda: f64, n: usize, r: f64) -> f64 {
    let nf = n as f64;
    math::pow(r, 2.0 * nf) * math::pow(j.length / i.length, theta * nf / 4.0 - 0.5) * math::pow(lambda, (nf - 1.0) / 2.0)
}

/// |J|^{-1/2} Φ_J(t) (t − c(J))^k.
pub fn moment_bump(j: &Interval, k: u32) -> SampledFunction {
    let (c, len) = (j.center, j.length);
    SampledFunction::from_jet(
        move |t| {
            let u = t + (-c);
            cutoff_jet(u.scale(1.0 / len)) * u.powi(k)
        },
        JET_LEN - 1,
        Some((c - 2.0 * len, c + 2.0 * len)),
        len,
    )
    .scaled(1.0 / math::sqrt(len))
}

/// 2^{3k} k! |J|^k.
pub fn moment_bound(j: &Interval, k: u32) -> f64 {
    math::pow2(3 * k as i32) * math::factorial(k as usize) * math::powi(j.length, k as i32)
}

/// ec(I,J)^{-(N+1/2)} for concentric intervals.
pub fn recenter_constant(i: &Interval, j: &Interval, n: usize) -> Result<f64> {
    if (i.center - j.center).abs() > 1e-12 * i.length.max(j.length) {
        return Err(pre("recentering needs concentric intervals"));
    }
    Ok(math::pow(ec(i, j), -(n as f64 + 0.5)))
}

/// ⟨f, g⟩ on the aligned grid of step 2^{-level} · min scale, over the common support.
pub fn pairing(f: &SampledFunction, g: &SampledFunction, level: u32) -> Result<f64> {
    let (a, b) = match (f.support, g.support) {
        (Some((a, b)), Some((c, d))) => (a.max(c), b.min(d)),
        (Some(s), None) | (None, Some(s)) => s,
        (None, None) => return Err(Error::Quadrature("pairing needs one compactly supported factor".into())),
    };
    if a >= b {
        return Ok(0.0);
    }
    let step = quad::pow2_floor(f.scale.min(g.scale)) * math::pow2(-(level as i32));
    let v = quad::grid_sum(&|x| f.value(x) * g.value(x), a, b, step);
    if !v.is_finite() {
        return Err(Error::Quadrature("non-finite pairing".into()));
    }
    Ok(v)
}

/// Shape of the pairing-decay bound, without the constant.
pub fn pair_decay_shape(i: &Interval, j: &Interval, mean_zero: bool, n: usize) -> Result<f64> {
    let r = rdist(i, j);
    if mean_zero {
        if j.length > i.length * (1.0 + 1e-12) {
            return Err(pre("mean-zero decay needs |J| <= |I|"));
        }
        Ok(math::pow(j.length / i.length, 1.5) * math::pow(r, -(n as f64 - 1.0)))
    } else {
        Ok(math::sqrt(ec(i, j)) * math::pow(r, -(n as f64)))
    }
}

/// Measured |⟨φ_I, ψ_J⟩| and the bound C · shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairDecay {
    pub measured: f64,
    pub bound: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn pair_decay_check(
    phi: &SampledFunction,
    i: &Interval,
    psi: &SampledFunction,
    j: &Interval,
    mean_zero: bool,
    n: usize,
    constant: f64,
    level: u32,
) -> Result<PairDecay> {
    let shape = pair_decay_shape(i, j, mean_zero, n)?;
    let measured = pairing(phi, psi, level)?.abs();
    Ok(PairDecay { measured, bound: constant * shape })
}

/// f − (average of f over W) · Φ((x − c(W))/(|W|/2)); the plateau is 1 on W.
pub fn mean_zero_projection(f: &SampledFunction, window: &Interval) -> SampledFunction {
    let mean = f.integral_over(window.left(), window.right()) / window.length;
    let plateau = cutoff_on(&window.dilate(0.5));
    f.sub(&plateau.scaled(mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_support_conditions() {
        for m in -4096..=4096 {
            let x = m as f64 / 1024.0;
            let v = cutoff_value(x);
            if x.abs() <= 1.0 {
                assert_eq!(v, 1.0);
            } else if x.abs() >= 2.0 {
                assert_eq!(v, 0.0);
            } else {
                assert!((0.0..=1.0).contains(&v));
            }
        }
        // strictness is only representable away from the glue points
        for m in 17..32 {
            let v = cutoff_value(m as f64 / 16.0);
            assert!(v > 0.0 && v < 1.0);
        }
    }

    #[test]
    fn cutoff_integral_is_three() {
        let v = cutoff().integral_over(-2.0, 2.0);
        assert!((v - CUTOFF_INTEGRAL).abs() < 1e-12, "{v}");
    }

    #[test]
    fn jet_and_fast_path_agree() {
        let f = cutoff();
        for m in 0..200 {
            let x = -2.2 + m as f64 * 0.022;
            let mut d = [0.0; 3];
            f.derivs(x, &mut d).unwrap();
            assert!((d[0] - cutoff_value(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn recenter_examples() {
        let j = Interval::new(0.0, 1.0).unwrap();
        let i = Interval::new(0.0, 4.0).unwrap();
        assert_eq!(recenter_constant(&j, &j, 3).unwrap(), 1.0);
        assert!((recenter_constant(&i, &j, 2).unwrap() - 32.0).abs() < 1e-12);
        assert_eq!(recenter_constant(&i, &j, 2).unwrap(), recenter_constant(&j, &i, 2).unwrap());
        assert!(recenter_constant(&i, &Interval::new(1.0, 1.0).unwrap(), 2).is_err());
    }

    #[test]
    fn outer_gain_example() {
        // |J|/|I| = 2^-4 and rdist = 4
        let i = Interval::from_endpoints(0.0, 16.0).unwrap();
        let j = Interval::from_endpoints(63.0, 64.0).unwrap();
        assert_eq!(rdist(&i, &j), 4.0);
        let g = outer_cutoff_gain(&i, &j, 0.5, 8);
        assert!((g - math::pow2(-10)).abs() < 1e-18);
    }

    #[test]
    fn moment_bump_sup() {
        let j = Interval::from_endpoints(0.0, 1.0).unwrap();
        let f = moment_bump(&j, 1);
        let sup = f.lp_norm(f64::INFINITY).unwrap();
        assert!(sup <= 2.0 && sup > 1.0, "{sup}");
        let plain = moment_bump(&j, 0);
        assert!((plain.value(0.5) - 1.0).abs() < 1e-15);
    }
}
