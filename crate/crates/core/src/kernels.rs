//! Compact Calderón–Zygmund kernels: evaluation, smoothness diagnostics,
//! envelope fitting and the builtin kernels.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::admissible::{AdmissibleTriple, Monotone, StepEnvelope, GRID_MAX, GRID_MIN};
use crate::bumps::{cutoff_jet, cutoff_value};
use crate::error::{arg, pre, Error, Result};
use crate::exec::Executor;
use crate::jet::Jet;
use crate::math;
use crate::quad;

/// How the kernel behaves on the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingularityClass {
    /// Extends continuously to t = x.
    Bounded,
    /// K = σ(t, x)/(t − x) with a smooth symbol σ.
    PvOdd,
}

impl SingularityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SingularityClass::Bounded => "bounded",
            SingularityClass::PvOdd => "pv_odd",
        }
    }
}

/// Pointwise kernel data.
pub trait KernelFn: Send + Sync {
    /// K(t, x); for bounded kernels also defined (by continuity) at t = x.
    fn eval(&self, t: f64, x: f64) -> f64;

    /// σ(t, x) = (t − x) K(t, x), extended to the diagonal.
    fn symbol(&self, t: f64, x: f64) -> f64 {
        (t - x) * self.eval(t, x)
    }

    /// (∂_t σ, ∂_x σ).
    fn symbol_grad(&self, _t: f64, _x: f64) -> (f64, f64) {
        (0.0, 0.0)
    }

    /// True when σ is constant, so the regular remainder vanishes.
    fn constant_symbol(&self) -> bool {
        false
    }

    /// (σ(t, x) − σ(x, x))/(t − x), with limit ∂_t σ(x, x).
    fn remainder_t(&self, t: f64, x: f64) -> f64 {
        if t == x {
            self.symbol_grad(x, x).0
        } else {
            (self.symbol(t, x) - self.symbol(x, x)) / (t - x)
        }
    }

    /// (σ(t, x) − σ(t, t))/(t − x), with limit −∂_x σ(t, t).
    fn remainder_x(&self, t: f64, x: f64) -> f64 {
        if t == x {
            -self.symbol_grad(t, t).1
        } else {
            (self.symbol(t, x) - self.symbol(t, t)) / (t - x)
        }
    }
}

/// A kernel with its Hölder exponent, constant, class and optional admissible triple.
#[derive(Clone)]
pub struct CzKernel {
    pub name: String,
    /// Canonical parameter string (part of cache keys and reports).
    pub params: String,
    pub delta: f64,
    pub constant: f64,
    pub class: SingularityClass,
    pub triple: Option<AdmissibleTriple>,
    func: Arc<dyn KernelFn>,
}

impl fmt::Debug for CzKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CzKernel")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("delta", &self.delta)
            .field("constant", &self.constant)
            .field("class", &self.class)
            .field("triple", &self.triple.as_ref().map(|t| t.name.clone()))
            .finish()
    }
}

impl CzKernel {
    pub fn new(name: impl Into<String>, params: impl Into<String>, delta: f64, constant: f64, class: SingularityClass, func: Arc<dyn KernelFn>) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(arg(format!("delta must be in (0, 1], got {delta}")));
        }
        if !(constant > 0.0) {
            return Err(arg("kernel constant must be positive"));
        }
        Ok(CzKernel { name: name.into(), params: params.into(), delta, constant, class, triple: None, func })
    }

    /// `name` or `name:params`.
    pub fn id(&self) -> String {
        if self.params.is_empty() {
            self.name.clone()
        } else {
            format!("{}:{}", self.name, self.params)
        }
    }

    pub fn with_triple(mut self, triple: AdmissibleTriple) -> Self {
        self.triple = Some(triple);
        self
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(arg(format!("delta must be in (0, 1], got {delta}")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn func(&self) -> &Arc<dyn KernelFn> {
        &self.func
    }

    /// K(t, x); NaN on the diagonal of a pv kernel.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        if t == x && self.class == SingularityClass::PvOdd {
            return f64::NAN;
        }
        self.func.eval(t, x)
    }

    pub fn symbol(&self, t: f64, x: f64) -> f64 {
        self.func.symbol(t, x)
    }

    pub fn symbol_grad(&self, t: f64, x: f64) -> (f64, f64) {
        self.func.symbol_grad(t, x)
    }

    /// The kernel of the adjoint, K*(t, x) = K(x, t). Drops the fitted triple.
    pub fn adjoint(&self) -> CzKernel {
        let name = if self.name.ends_with('*') { self.name.trim_end_matches('*').to_string() } else { format!("{}*", self.name) };
        CzKernel {
            name,
            params: self.params.clone(),
            delta: self.delta,
            constant: self.constant,
            class: self.class,
            triple: None,
            func: Arc::new(Adjoint(self.func.clone())),
        }
    }

    /// L(d) S(d) D(e) at d = |t − x|, e = 1 + |t + x|/(1 + d); 1 without a triple.
    pub fn envelope(&self, t: f64, x: f64) -> f64 {
        match &self.triple {
            Some(tr) => {
                let d = (t - x).abs();
                tr.product(d, d, eccentric_coordinate(t, x))
            }
            None => 1.0,
        }
    }
}

/// 1 + |t + x|/(1 + |t − x|): the far-from-origin coordinate of the D factor.
pub fn eccentric_coordinate(t: f64, x: f64) -> f64 {
    1.0 + (t + x).abs() / (1.0 + (t - x).abs())
}

struct Zero;

impl KernelFn for Zero {
    fn eval(&self, _t: f64, _x: f64) -> f64 {
        0.0
    }
    fn constant_symbol(&self) -> bool {
        true
    }
}

struct Hilbert;

impl KernelFn for Hilbert {
    fn eval(&self, t: f64, x: f64) -> f64 {
        1.0 / (t - x)
    }
    fn symbol(&self, _t: f64, _x: f64) -> f64 {
        1.0
    }
    fn constant_symbol(&self) -> bool {
        true
    }
}

/// (b(t) − b(x))/(t − x) with b = e^{-x²}.
struct CommutatorGauss;

impl CommutatorGauss {
    fn at(t: f64, x: f64) -> f64 {
        let u = t - x;
        if u == 0.0 {
            return -2.0 * x * math::exp(-x * x);
        }
        let v = u * (t + x);
        if v.abs() > 1.0 {
            return (math::exp(-t * t) - math::exp(-x * x)) / u;
        }
        // b(t) − b(x) = e^{-x²} expm1(−(t − x)(t + x)) stays accurate as t → x
        math::exp(-x * x) * math::expm1(-v) / u
    }
}

impl KernelFn for CommutatorGauss {
    fn eval(&self, t: f64, x: f64) -> f64 {
        CommutatorGauss::at(t, x)
    }
    fn symbol(&self, t: f64, x: f64) -> f64 {
        math::exp(-t * t) - math::exp(-x * x)
    }
    fn symbol_grad(&self, t: f64, x: f64) -> (f64, f64) {
        (-2.0 * t * math::exp(-t * t), 2.0 * x * math::exp(-x * x))
    }
}

/// η(t + x) θ(t − x)/(t − x) with η = Φ(·/a), θ = Φ(·/c).
struct DampedHilbert {
    eta_scale: f64,
    theta_scale: f64,
}

impl DampedHilbert {
    fn parts(&self, t: f64, x: f64) -> (f64, f64, f64, f64) {
        let e = cutoff_jet(Jet::variable((t + x) / self.eta_scale, 2));
        let th = cutoff_jet(Jet::variable((t - x) / self.theta_scale, 2));
        (e.value(), e.derivative(1) / self.eta_scale, th.value(), th.derivative(1) / self.theta_scale)
    }
}

impl KernelFn for DampedHilbert {
    fn eval(&self, t: f64, x: f64) -> f64 {
        self.symbol(t, x) / (t - x)
    }
    fn symbol(&self, t: f64, x: f64) -> f64 {
        cutoff_value((t + x) / self.eta_scale) * cutoff_value((t - x) / self.theta_scale)
    }
    fn symbol_grad(&self, t: f64, x: f64) -> (f64, f64) {
        let (e, de, th, dth) = self.parts(t, x);
        (de * th + e * dth, de * th - e * dth)
    }
    fn remainder_t(&self, t: f64, x: f64) -> f64 {
        let (e, de, _, _) = self.parts(t, x);
        if t == x {
            return de;
        }
        // θ ≡ 1 near 0; split so the subtraction only sees η
        let ex = cutoff_value(2.0 * x / self.eta_scale);
        let th = cutoff_value((t - x) / self.theta_scale);
        (e * th - ex) / (t - x)
    }
    fn remainder_x(&self, t: f64, x: f64) -> f64 {
        let (e, de, _, _) = self.parts(t, x);
        if t == x {
            return -de;
        }
        let et = cutoff_value(2.0 * t / self.eta_scale);
        let th = cutoff_value((t - x) / self.theta_scale);
        (e * th - et) / (t - x)
    }
}

/// K(x, t); the symbol picks up a sign since t − x flips.
struct Adjoint(Arc<dyn KernelFn>);

impl KernelFn for Adjoint {
    fn eval(&self, t: f64, x: f64) -> f64 {
        self.0.eval(x, t)
    }
    fn symbol(&self, t: f64, x: f64) -> f64 {
        -self.0.symbol(x, t)
    }
    fn symbol_grad(&self, t: f64, x: f64) -> (f64, f64) {
        let (gt, gx) = self.0.symbol_grad(x, t);
        (-gx, -gt)
    }
    fn constant_symbol(&self) -> bool {
        self.0.constant_symbol()
    }
}

/// Kernel from a closure, bounded class.
pub struct FnKernel<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> KernelFn for FnKernel<F> {
    fn eval(&self, t: f64, x: f64) -> f64 {
        (self.0)(t, x)
    }
}

/// Splits `NAME[:params]`.
pub fn parse_kernel_spec(spec: &str) -> (String, String) {
    match spec.split_once(':') {
        Some((n, p)) => (n.trim().to_string(), p.trim().to_string()),
        None => (spec.trim().to_string(), String::new()),
    }
}

fn parse_floats(params: &str, want: usize, what: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = params
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| arg(format!("{what}: bad number '{s}'"))))
        .collect::<Result<_>>()?;
    if vals.len() != want {
        return Err(arg(format!("{what} takes {want} parameters")));
    }
    Ok(vals)
}

/// The builtin kernels: zero, hilbert, commutator_gauss, damped_hilbert[:a,c], paraproduct[:b].
pub fn builtin_kernel(name: &str, params: &str) -> Result<CzKernel> {
    match name {
        "zero" => CzKernel::new("zero", "", 1.0, 1.0, SingularityClass::Bounded, Arc::new(Zero)),
        "hilbert" => CzKernel::new("hilbert", "", 1.0, 2.0, SingularityClass::PvOdd, Arc::new(Hilbert)),
        "commutator_gauss" => CzKernel::new("commutator_gauss", "", 1.0, 1.0, SingularityClass::Bounded, Arc::new(CommutatorGauss)),
        "damped_hilbert" => {
            let (a, c) = if params.is_empty() {
                (4.0, 2.0)
            } else {
                let v = parse_floats(params, 2, "damped_hilbert")?;
                (v[0], v[1])
            };
            if !(a > 0.0 && c > 0.0) {
                return Err(arg("damped_hilbert scales must be positive"));
            }
            let p = format!("{a},{c}");
            CzKernel::new("damped_hilbert", p, 1.0, 1.0, SingularityClass::PvOdd, Arc::new(DampedHilbert { eta_scale: a, theta_scale: c }))
        }
        "paraproduct" => {
            let b = if params.is_empty() { "gauss_cos" } else { params };
            crate::paraproduct::Paraproduct::builtin(b)?.kernel()
        }
        _ => Err(Error::Unknown { kind: "kernel", name: name.to_string() }),
    }
}

/// Builtin kernel from `NAME[:params]`.
pub fn kernel_from_spec(spec: &str) -> Result<CzKernel> {
    let (n, p) = parse_kernel_spec(spec);
    builtin_kernel(&n, &p)
}

/// |K(t,x) − K(t',x')| |t−x|^{1+δ} / (|t−t'| + |x−x'|)^δ, for 2(|t−t'| + |x−x'|) < |t−x|.
pub fn smoothness_ratio(k: &CzKernel, t: f64, x: f64, tp: f64, xp: f64) -> Result<f64> {
    let d = (t - x).abs();
    let disp = (t - tp).abs() + (x - xp).abs();
    if !(2.0 * disp < d) {
        return Err(arg(format!("smoothness ratio needs 2(|t-t'|+|x-x'|) < |t-x|, got {disp} vs {d}")));
    }
    if disp == 0.0 {
        return Ok(0.0);
    }
    let diff = (k.eval(t, x) - k.eval(tp, xp)).abs();
    if !diff.is_finite() {
        return Err(Error::NonFinite(format!("kernel {} at ({t}, {x}) or ({tp}, {xp})", k.id())));
    }
    Ok(diff * math::pow(d, 1.0 + k.delta) / math::pow(disp, k.delta))
}

/// Deterministic low-discrepancy sample of admissible tuples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSpec {
    pub count: usize,
    /// |t − x| is log-uniform in [d_min, d_max].
    pub d_min: f64,
    pub d_max: f64,
    /// |x| is log-uniform in [anchor_min, anchor_max], with either sign.
    pub anchor_min: f64,
    pub anchor_max: f64,
    /// Offset into the Halton sequence.
    pub offset: u64,
}

impl Default for SampleSpec {
    fn default() -> Self {
        SampleSpec { count: 10_000, d_min: math::pow2(-8), d_max: math::pow2(12), anchor_min: math::pow2(-8), anchor_max: math::pow2(16), offset: 1 }
    }
}

/// (t, x, t', x') with 2(|t−t'| + |x−x'|) < |t−x|.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleTuple {
    pub t: f64,
    pub x: f64,
    pub tp: f64,
    pub xp: f64,
}

impl SampleSpec {
    pub fn tuple(&self, n: usize) -> SampleTuple {
        let u = quad::halton::<7>(self.offset + n as u64);
        let d = self.d_min * math::pow(self.d_max / self.d_min, u[0]);
        let x_mag = self.anchor_min * math::pow(self.anchor_max / self.anchor_min, u[1]);
        let x = if u[2] < 0.5 { x_mag } else { -x_mag };
        let orient = if u[3] < 0.5 { 1.0 } else { -1.0 };
        let t = x + orient * d;
        // displacement in (0, d/2), log-distributed over twenty octaves
        let disp = 0.5 * d * math::pow(2.0, -20.0 * (1.0 - u[4]));
        let disp = disp.min(0.5 * d * (1.0 - 1e-9));
        let st = if u[6] < 0.25 || (0.5..0.75).contains(&u[6]) { 1.0 } else { -1.0 };
        let sx = if u[6] < 0.5 { 1.0 } else { -1.0 };
        SampleTuple { t, x, tp: t + st * disp * u[5], xp: x + sx * disp * (1.0 - u[5]) }
    }

    pub fn tuples(&self) -> Vec<SampleTuple> {
        (0..self.count).map(|n| self.tuple(n)).collect()
    }
}

/// A sampled tuple whose normalized ratio exceeds the declared constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub tuple: SampleTuple,
    pub ratio: f64,
}

/// Output of [`verify_compact_czk`].
#[derive(Clone, Debug, PartialEq)]
pub struct KernelDiagnostics {
    pub kernel: String,
    pub delta: f64,
    pub declared_constant: f64,
    pub fitted_constant: f64,
    pub violations: Vec<Violation>,
    /// (x, value) samples of L, S, D on the geometric grid.
    pub envelopes: [Vec<(f64, f64)>; 3],
}

/// Slack on the declared constant before a ratio counts as a violation.
pub const VIOLATION_SLACK: f64 = 1.05;

fn normalized(ratio: f64, env: f64) -> f64 {
    if ratio == 0.0 {
        0.0
    } else if env == 0.0 {
        f64::INFINITY
    } else {
        ratio / env
    }
}

fn sample_ratios(k: &CzKernel, spec: &SampleSpec, exec: &dyn Executor) -> Result<Vec<f64>> {
    let vals = exec.map(spec.count, &|n| {
        let s = spec.tuple(n);
        smoothness_ratio(k, s.t, s.x, s.tp, s.xp).unwrap_or(f64::NAN)
    });
    if let Some(n) = vals.iter().position(|v| !v.is_finite()) {
        let s = spec.tuple(n);
        return Err(Error::NonFinite(format!("kernel {} at sample ({}, {}, {}, {})", k.id(), s.t, s.x, s.tp, s.xp)));
    }
    Ok(vals)
}

/// Max over samples of ratio / (L S D); violations above `constant × 1.05`.
pub fn verify_compact_czk(k: &CzKernel, spec: &SampleSpec, exec: &dyn Executor) -> Result<KernelDiagnostics> {
    let triple = k.triple.as_ref().ok_or_else(|| pre(format!("kernel {} has no admissible triple attached", k.id())))?;
    let ratios = sample_ratios(k, spec, exec)?;
    let mut fitted: f64 = 0.0;
    let mut violations = Vec::new();
    for (n, r) in ratios.iter().enumerate() {
        let s = spec.tuple(n);
        let q = normalized(*r, k.envelope(s.t, s.x));
        fitted = fitted.max(q);
        if q > k.constant * VIOLATION_SLACK {
            violations.push(Violation { tuple: s, ratio: q });
        }
    }
    Ok(KernelDiagnostics {
        kernel: k.id(),
        delta: k.delta,
        declared_constant: k.constant,
        fitted_constant: fitted,
        violations,
        envelopes: triple.samples(),
    })
}

/// Cube-root sup envelopes of the smoothness ratio over d, displacement and e.
pub fn fit_admissible(k: &CzKernel, spec: &SampleSpec, exec: &dyn Executor) -> Result<AdmissibleTriple> {
    if spec.count == 0 {
        return Err(arg("empty sample set"));
    }
    let ratios = sample_ratios(k, spec, exec)?;
    let n = (GRID_MAX - GRID_MIN + 1) as usize;
    let mut l = vec![0.0f64; n];
    let mut s = vec![0.0f64; n];
    let mut d = vec![0.0f64; n];
    let (mut l_low, mut s_high, mut d_low) = (0.0f64, 0.0f64, 0.0f64);
    let bucket = |y: f64, up: bool| -> i64 {
        let mut i = math::round(4.0 * math::log2(y)) as i64;
        let g = math::pow(2.0, i as f64 / 4.0);
        if up && g < y {
            i += 1;
        }
        if !up && g > y {
            i -= 1;
        }
        i - GRID_MIN as i64
    };
    for (idx, r) in ratios.iter().enumerate() {
        if *r == 0.0 {
            continue;
        }
        let c = math::cbrt(*r);
        let tup = spec.tuple(idx);
        let dist = (tup.t - tup.x).abs();
        let disp = (tup.t - tup.tp).abs() + (tup.x - tup.xp).abs();
        let e = eccentric_coordinate(tup.t, tup.x);
        // L at the grid point at or below d; D likewise at e; S at or above the displacement
        let il = bucket(dist, false);
        if il < 0 {
            l_low = l_low.max(c);
        } else {
            let i = (il as usize).min(n - 1);
            l[i] = l[i].max(c);
        }
        let ie = bucket(e, false);
        if ie < 0 {
            d_low = d_low.max(c);
        } else {
            let i = (ie as usize).min(n - 1);
            d[i] = d[i].max(c);
        }
        let is = bucket(disp, true);
        if is >= n as i64 {
            s_high = s_high.max(c);
        } else {
            let i = is.max(0) as usize;
            s[i] = s[i].max(c);
        }
    }
    for i in (0..n - 1).rev() {
        l[i] = l[i].max(l[i + 1]);
        d[i] = d[i].max(d[i + 1]);
    }
    for i in 1..n {
        s[i] = s[i].max(s[i - 1]);
    }
    let l_env = StepEnvelope { direction: Monotone::Nonincreasing, overflow: l_low.max(l[0]), values: l };
    let d_env = StepEnvelope { direction: Monotone::Nonincreasing, overflow: d_low.max(d[0]), values: d };
    let s_env = StepEnvelope { direction: Monotone::Nondecreasing, overflow: s_high.max(s[n - 1]), values: s };
    Ok(AdmissibleTriple::from_envelopes(format!("fit:{}", k.id()), l_env, s_env, d_env))
}

/// Result of [`decay_envelope`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayCertificate {
    /// |K(t,x)| |t − x|.
    pub lhs: f64,
    /// F̃(t, x).
    pub envelope: f64,
    /// envelope − lhs (∞ when both vanish).
    pub margin: f64,
    pub terms: usize,
    pub holds: bool,
}

/// F̃(t,x) = C Σ (4/3)^{-k} F(t_k, x_k) along the spreading sequence, and the decay certificate.
pub fn decay_envelope(k: &CzKernel, t: f64, x: f64, eps: f64) -> Result<DecayCertificate> {
    if t == x {
        return Err(arg("decay envelope needs t != x"));
    }
    if !(eps > 0.0 && eps < 1.0 / 3.0) {
        return Err(arg("decay envelope needs 0 < eps < 1/3"));
    }
    let triple = k.triple.as_ref().ok_or_else(|| pre(format!("kernel {} has no admissible triple attached", k.id())))?;
    let (mut a, mut b) = if t < x { (t, x) } else { (x, t) };
    let sum = a + b;
    let mut weight = 1.0;
    let mut acc = 0.0;
    let mut terms = 0;
    let step = (1.0 - eps) / 4.0;
    while weight > 1e-14 {
        let d = b - a;
        let f = triple.product(d, d, 1.0 + sum.abs() / (1.0 + d));
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("envelope term {terms}")));
        }
        acc += weight * f;
        terms += 1;
        a -= step * d;
        b += step * d;
        weight *= 0.75;
        if terms > 10_000 {
            return Err(Error::NoConvergence { what: "decay envelope", iterations: terms });
        }
    }
    let envelope = k.constant * acc;
    let kv = k.eval(t, x);
    if !kv.is_finite() {
        return Err(Error::NonFinite(format!("kernel {} at ({t}, {x})", k.id())));
    }
    let lhs = kv.abs() * (t - x).abs();
    let margin = if lhs == 0.0 && envelope == 0.0 { f64::INFINITY } else { envelope - lhs };
    Ok(DecayCertificate { lhs, envelope, margin, terms, holds: lhs <= envelope })
}

/// Sampling of t' for [`regularity_profile`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchSpec {
    /// Log-spaced magnitudes of t − t' per sign.
    pub magnitudes: usize,
    /// Smallest magnitude as a fraction of |t − x|/2.
    pub min_fraction: f64,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec { magnitudes: 32, min_fraction: math::pow2(-20) }
    }
}

/// Sampled sup over t' of (|t−x|^{1+δ'}/|t−t'|^{δ'}) |K(t,x) − K(t',x)|.
pub fn regularity_profile(k: &CzKernel, t: f64, x: f64, delta_p: f64, search: &SearchSpec) -> Result<f64> {
    if t == x {
        return Err(arg("regularity profile needs t != x"));
    }
    if !(delta_p > 0.0 && delta_p < k.delta) {
        return Err(arg(format!("regularity profile needs 0 < delta' < {}", k.delta)));
    }
    let d = (t - x).abs();
    let top = 0.5 * d * (1.0 - 1e-9);
    let kv = k.eval(t, x);
    let n = search.magnitudes.max(2);
    let mut best: f64 = 0.0;
    for i in 0..n {
        let frac = math::pow(search.min_fraction, 1.0 - i as f64 / (n - 1) as f64);
        let m = top * frac;
        for sgn in [1.0, -1.0] {
            let tp = t + sgn * m;
            let v = (kv - k.eval(tp, x)).abs() * math::pow(d, 1.0 + delta_p) / math::pow(m, delta_p);
            if v.is_finite() {
                best = best.max(v);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let c = builtin_kernel("commutator_gauss", "").unwrap();
        assert!((c.eval(0.0, 1.0) + 0.6321205588285577).abs() < 1e-15);
        let h = builtin_kernel("hilbert", "").unwrap();
        assert_eq!(h.eval(0.0, 1.0), -1.0);
        assert!(builtin_kernel("nope", "").is_err());
    }

    #[test]
    fn hilbert_ratio_example() {
        let h = builtin_kernel("hilbert", "").unwrap();
        let r = smoothness_ratio(&h, 0.0, 1.0, 0.1, 1.0).unwrap();
        assert!((r - 1.0 / 0.9).abs() < 1e-12, "{r}");
        assert!(smoothness_ratio(&h, 0.0, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn samples_respect_precondition() {
        let spec = SampleSpec::default();
        for n in 0..2000 {
            let s = spec.tuple(n);
            let d = (s.t - s.x).abs();
            let disp = (s.t - s.tp).abs() + (s.x - s.xp).abs();
            assert!(2.0 * disp < d);
        }
    }
}
