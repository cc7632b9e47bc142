//! Admissible triples (L, S, D) and the bound functions F_K, F_W, F.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::dyadic::{rdist, Interval};
use crate::error::{arg, Result};
use crate::math;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Exponent range of the geometric grid x = 2^{i/4}.
pub const GRID_MIN: i32 = -80;
pub const GRID_MAX: i32 = 80;

pub fn grid_point(i: i32) -> f64 {
    math::pow(2.0, i as f64 / 4.0)
}

/// All grid points, ascending.
pub fn grid() -> Vec<f64> {
    (GRID_MIN..=GRID_MAX).map(grid_point).collect()
}

/// Index of the largest grid point ≤ y (may fall outside the grid range).
fn grid_floor(y: f64) -> i32 {
    let mut i = math::round(4.0 * math::log2(y)) as i32;
    if grid_point(i) > y {
        i -= 1;
    }
    i
}

/// Index of the smallest grid point ≥ y.
fn grid_ceil(y: f64) -> i32 {
    let mut i = math::round(4.0 * math::log2(y)) as i32;
    if grid_point(i) < y {
        i += 1;
    }
    i
}

/// Monotone direction of a step envelope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotone {
    /// Value at y is read from the grid point at or below y.
    Nonincreasing,
    /// Value at y is read from the grid point at or above y.
    Nondecreasing,
}

/// Piecewise constant function on the geometric grid.
#[derive(Clone, Debug, PartialEq)]
pub struct StepEnvelope {
    pub direction: Monotone,
    /// One value per grid point `GRID_MIN..=GRID_MAX`.
    pub values: Vec<f64>,
    /// Used below the first grid point (nonincreasing) or above the last (nondecreasing).
    pub overflow: f64,
}

impl StepEnvelope {
    pub fn eval(&self, y: f64) -> f64 {
        let last = self.values.len() as i32 - 1;
        if y <= 0.0 {
            return match self.direction {
                Monotone::Nonincreasing => self.overflow,
                Monotone::Nondecreasing => self.values[0],
            };
        }
        match self.direction {
            Monotone::Nonincreasing => {
                let i = grid_floor(y) - GRID_MIN;
                if i < 0 {
                    self.overflow
                } else {
                    self.values[i.min(last) as usize]
                }
            }
            Monotone::Nondecreasing => {
                let i = grid_ceil(y) - GRID_MIN;
                if i > last {
                    self.overflow
                } else {
                    self.values[i.max(0) as usize]
                }
            }
        }
    }

    /// Running supremum of `f` sampled on the grid.
    pub fn running_sup(f: &dyn Fn(f64) -> f64, direction: Monotone) -> Self {
        let raw: Vec<f64> = grid().into_iter().map(f).collect();
        let mut values = raw.clone();
        match direction {
            Monotone::Nonincreasing => {
                for i in (0..values.len() - 1).rev() {
                    values[i] = values[i].max(values[i + 1]);
                }
                StepEnvelope { direction, overflow: values[0], values }
            }
            Monotone::Nondecreasing => {
                for i in 1..values.len() {
                    values[i] = values[i].max(values[i - 1]);
                }
                let overflow = values[values.len() - 1];
                StepEnvelope { direction, values, overflow }
            }
        }
    }

    pub fn into_fn(self) -> ScalarFn {
        Arc::new(move |y| self.eval(y))
    }
}

/// The functions L, S, D with their uniform bound.
#[derive(Clone)]
pub struct AdmissibleTriple {
    pub name: String,
    l: ScalarFn,
    s: ScalarFn,
    d: ScalarFn,
    pub bound: f64,
    /// Declared monotonicity of (L, S, D).
    pub monotone: [bool; 3],
}

impl fmt::Debug for AdmissibleTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdmissibleTriple")
            .field("name", &self.name)
            .field("bound", &self.bound)
            .field("monotone", &self.monotone)
            .finish()
    }
}

impl AdmissibleTriple {
    pub fn new(name: impl Into<String>, l: ScalarFn, s: ScalarFn, d: ScalarFn, monotone: [bool; 3]) -> Self {
        let mut t = AdmissibleTriple { name: name.into(), l, s, d, bound: 0.0, monotone };
        t.bound = grid()
            .into_iter()
            .map(|x| t.l(x).max(t.s(x)).max(t.d(x)))
            .fold(0.0, f64::max);
        t
    }

    pub fn l(&self, x: f64) -> f64 {
        (self.l)(x)
    }
    pub fn s(&self, x: f64) -> f64 {
        (self.s)(x)
    }
    pub fn d(&self, x: f64) -> f64 {
        (self.d)(x)
    }

    /// L(a) S(b) D(c).
    pub fn product(&self, a: f64, b: f64, c: f64) -> f64 {
        self.l(a) * self.s(b) * self.d(c)
    }

    /// L = (1+x)^{-α}, S = (1+1/x)^{-α}, D = (1+x)^{-1}.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(arg(format!("power triple needs alpha > 0, got {alpha}")));
        }
        Ok(AdmissibleTriple::new(
            format!("power:{alpha}"),
            Arc::new(move |x: f64| math::pow(1.0 + x, -alpha)),
            Arc::new(move |x: f64| if x <= 0.0 { 0.0 } else { math::pow(x / (1.0 + x), alpha) }),
            Arc::new(|x: f64| 1.0 / (1.0 + x)),
            [true; 3],
        ))
    }

    /// L = e^{-x}, S = e^{-1/x}, D = e^{-x}.
    pub fn exponential() -> Self {
        AdmissibleTriple::new(
            "exp",
            Arc::new(|x: f64| math::exp(-x)),
            Arc::new(|x: f64| if x <= 0.0 { 0.0 } else { math::exp(-1.0 / x) }),
            Arc::new(|x: f64| math::exp(-x)),
            [true; 3],
        )
    }

    pub fn zero() -> Self {
        let z: ScalarFn = Arc::new(|_| 0.0);
        AdmissibleTriple::new("zero", z.clone(), z.clone(), z, [true; 3])
    }

    /// Builtin by identifier: `power:α`, `exp`, `zero`.
    pub fn builtin(spec: &str) -> Result<Self> {
        let (name, param) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (spec.trim(), None),
        };
        match (name, param) {
            ("power", Some(p)) => {
                let alpha: f64 = p.parse().map_err(|_| arg(format!("bad power exponent `{p}`")))?;
                AdmissibleTriple::power(alpha)
            }
            ("power", None) => AdmissibleTriple::power(1.0),
            ("exp", None) => Ok(AdmissibleTriple::exponential()),
            ("zero", None) => Ok(AdmissibleTriple::zero()),
            _ => Err(crate::Error::Unknown { kind: "admissible triple", name: spec.into() }),
        }
    }

    /// Step envelopes from grid values; used by the kernel fits.
    pub fn from_envelopes(name: impl Into<String>, l: StepEnvelope, s: StepEnvelope, d: StepEnvelope) -> Self {
        AdmissibleTriple::new(name, l.into_fn(), s.into_fn(), d.into_fn(), [true; 3])
    }

    /// Checks the declared monotonicity on the grid.
    pub fn check_monotone(&self) -> [bool; 3] {
        let g = grid();
        let mono = |f: &dyn Fn(f64) -> f64, up: bool| {
            g.windows(2).all(|w| if up { f(w[1]) >= f(w[0]) } else { f(w[1]) <= f(w[0]) })
        };
        [mono(&|x| self.l(x), false), mono(&|x| self.s(x), true), mono(&|x| self.d(x), false)]
    }

    /// Values of (L, S, D) on the grid.
    pub fn samples(&self) -> [Vec<(f64, f64)>; 3] {
        let g = grid();
        [
            g.iter().map(|&x| (x, self.l(x))).collect(),
            g.iter().map(|&x| (x, self.s(x))).collect(),
            g.iter().map(|&x| (x, self.d(x))).collect(),
        ]
    }
}

/// Running-supremum regularization: L₁, D₁ nonincreasing, S₁ nondecreasing.
pub fn regularize_monotone(t: &AdmissibleTriple) -> AdmissibleTriple {
    let l = StepEnvelope::running_sup(&|x| t.l(x), Monotone::Nonincreasing);
    let s = StepEnvelope::running_sup(&|x| t.s(x), Monotone::Nondecreasing);
    let d = StepEnvelope::running_sup(&|x| t.d(x), Monotone::Nonincreasing);
    let name = if t.name.starts_with("regularized(") { t.name.clone() } else { format!("regularized({})", t.name) };
    AdmissibleTriple::from_envelopes(name, l, s, d)
}

/// x ↦ L(x/λ) and likewise for S and D.
pub fn dilate_triple(t: &AdmissibleTriple, lambda: f64) -> Result<AdmissibleTriple> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(arg(format!("dilation needs lambda > 0, got {lambda}")));
    }
    let (l, s, d) = (t.l.clone(), t.s.clone(), t.d.clone());
    Ok(AdmissibleTriple::new(
        format!("{}@{}", t.name, lambda),
        Arc::new(move |x| l(x / lambda)),
        Arc::new(move |x| s(x / lambda)),
        Arc::new(move |x| d(x / lambda)),
        t.monotone,
    ))
}

/// Kernel and weak-compactness triples together with the lagom parameter.
#[derive(Clone, Debug)]
pub struct FBound {
    pub kernel: AdmissibleTriple,
    pub weak: AdmissibleTriple,
    pub m: u32,
}

impl FBound {
    pub fn new(kernel: AdmissibleTriple, weak: AdmissibleTriple, m: u32) -> Self {
        FBound { kernel, weak, m }
    }

    /// L_K(|I|) S_K(|I|) D_K(rdist(I, B_1)).
    pub fn f_k(&self, i: &Interval) -> f64 {
        let r = rdist(i, &Interval::ball(1.0));
        self.kernel.product(i.length, i.length, r)
    }

    /// L_W(2^{-M}|I|) S_W(2^M|I|) D_W(rdist(I, B_{2^M}) / M).
    pub fn f_w(&self, i: &Interval, m: u32) -> f64 {
        let (a, b, c) = weak_args(i, m);
        self.weak.product(a, b, c)
    }

    /// F(I; M) = F_K(I) + F_W(I; M).
    pub fn f(&self, i: &Interval, m: u32) -> f64 {
        self.f_k(i) + self.f_w(i, m)
    }

    /// (ΣL)(ΣS)(ΣD) for each part, summed.
    pub fn f_joint(&self, intervals: &[Interval], m: u32) -> f64 {
        let ball = Interval::ball(1.0);
        let (mut kl, mut ks, mut kd) = (0.0, 0.0, 0.0);
        let (mut wl, mut ws, mut wd) = (0.0, 0.0, 0.0);
        for i in intervals {
            kl += self.kernel.l(i.length);
            ks += self.kernel.s(i.length);
            kd += self.kernel.d(rdist(i, &ball));
            let (a, b, c) = weak_args(i, m);
            wl += self.weak.l(a);
            ws += self.weak.s(b);
            wd += self.weak.d(c);
        }
        kl * ks * kd + wl * ws * wd
    }
}

fn weak_args(i: &Interval, m: u32) -> (f64, f64, f64) {
    let big = math::pow2(m as i32);
    (i.length / big, i.length * big, rdist(i, &Interval::ball(big)) / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_lookup_is_exact_on_grid_points() {
        for i in GRID_MIN..=GRID_MAX {
            let x = grid_point(i);
            assert_eq!(grid_floor(x), i);
            assert_eq!(grid_ceil(x), i);
        }
    }

    #[test]
    fn f_k_examples() {
        let fb = FBound::new(AdmissibleTriple::power(1.0).unwrap(), AdmissibleTriple::zero(), 1);
        let unit = Interval::from_endpoints(0.0, 1.0).unwrap();
        assert!((fb.f_k(&unit) - 0.1).abs() < 1e-15);
        assert!((fb.f_k(&Interval::ball(1.0)) - 0.125).abs() < 1e-15);
        assert_eq!(fb.f_w(&unit, 3), 0.0);
        let twice = [unit, unit];
        assert!((fb.f_joint(&twice, 1) - 8.0 * fb.f_k(&unit)).abs() < 1e-15);
    }

    #[test]
    fn regularization_examples() {
        let t = AdmissibleTriple::new(
            "bumpy",
            Arc::new(|x: f64| x * math::exp(-x)),
            Arc::new(|x: f64| x.min(1.0)),
            Arc::new(|x: f64| math::exp(-x)),
            [false; 3],
        );
        let r = regularize_monotone(&t);
        for x in grid() {
            let want = if x <= 1.0 { math::exp(-1.0) } else { x * math::exp(-x) };
            assert!((r.l(x) - want).abs() < 1e-15, "L1({x})");
            assert_eq!(r.s(x), x.min(1.0));
            assert_eq!(r.d(x), math::exp(-x));
        }
    }

    #[test]
    fn dilation_example() {
        let t = dilate_triple(&AdmissibleTriple::power(1.0).unwrap(), 2.0).unwrap();
        assert!((t.l(2.0) - 0.5).abs() < 1e-15);
        assert!(dilate_triple(&t, 0.0).is_err());
    }
}
