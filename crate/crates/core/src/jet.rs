//! Truncated Taylor arithmetic.
//!
//! A [`Jet`] stores `f^(i)(x0) / i!` for `i < JET_LEN`, so evaluating a
//! formula on a jet seeded with [`Jet::variable`] yields every derivative
//! up to order `JET_LEN - 1` exactly (up to rounding), with no tables.

use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::math;

/// Number of stored coefficients; derivatives up to order 8.
pub const JET_LEN: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; JET_LEN],
    len: usize,
}

impl Jet {
    pub fn constant(v: f64, len: usize) -> Self {
        let mut c = [0.0; JET_LEN];
        c[0] = v;
        Jet { c, len: len.clamp(1, JET_LEN) }
    }

    /// The identity function expanded at `x0`.
    pub fn variable(x0: f64, len: usize) -> Self {
        let mut j = Jet::constant(x0, len);
        if j.len > 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of order `n`.
    pub fn coeff(&self, n: usize) -> f64 {
        if n < self.len {
            self.c[n]
        } else {
            0.0
        }
    }

    /// n-th derivative at the expansion point.
    pub fn derivative(&self, n: usize) -> f64 {
        self.coeff(n) * math::factorial(n)
    }

    /// Writes derivatives `0..out.len()` into `out`.
    pub fn write_derivatives(&self, out: &mut [f64]) {
        for (n, o) in out.iter_mut().enumerate() {
            *o = self.derivative(n);
        }
    }

    pub fn scale(mut self, s: f64) -> Self {
        for v in &mut self.c[..self.len] {
            *v *= s;
        }
        self
    }

    pub fn recip(self) -> Self {
        let n = self.len;
        let mut b = [0.0; JET_LEN];
        b[0] = 1.0 / self.c[0];
        for k in 1..n {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += self.c[i] * b[k - i];
            }
            b[k] = -acc * b[0];
        }
        Jet { c: b, len: n }
    }

    pub fn exp(self) -> Self {
        let n = self.len;
        let mut e = [0.0; JET_LEN];
        e[0] = math::exp(self.c[0]);
        for k in 1..n {
            let mut acc = 0.0;
            for i in 1..=k {
                acc += i as f64 * self.c[i] * e[k - i];
            }
            e[k] = acc / k as f64;
        }
        Jet { c: e, len: n }
    }

    /// cos ∘ self, by composing the Taylor series of cos at the base value.
    pub fn cos(self) -> Self {
        let x0 = self.c[0];
        let mut dx = self;
        dx.c[0] = 0.0;
        let mut acc = Jet::constant(0.0, self.len);
        let mut power = Jet::constant(1.0, self.len);
        for n in 0..self.len {
            let c = math::cos(x0 + n as f64 * core::f64::consts::FRAC_PI_2) / math::factorial(n);
            acc = acc + power.scale(c);
            power = power * dx;
        }
        acc
    }

    /// `self^m` for a non-negative integer exponent.
    pub fn powi(self, m: u32) -> Self {
        let mut acc = Jet::constant(1.0, self.len);
        for _ in 0..m {
            acc = acc * self;
        }
        acc
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        let n = self.len.min(rhs.len);
        for i in 0..n {
            self.c[i] += rhs.c[i];
        }
        self.len = n;
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let n = self.len.min(rhs.len);
        let mut c = [0.0; JET_LEN];
        for (k, slot) in c.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for i in 0..=k {
                acc += self.c[i] * rhs.c[k - i];
            }
            *slot = acc;
        }
        Jet { c, len: n }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        (-rhs) + self
    }
}
