//! Tabulated Hilbert transforms of compactly supported profiles.
//!
//! Convention: Hf(y) = pv ∫ f(s) / (s − y) ds, no 1/π factor.

use alloc::vec;
use alloc::vec::Vec;

const MULTIPOLE_TERMS: usize = 48;

/// Hf on the grid `y = m h`, extended by a multipole series far away.
#[derive(Clone, Debug)]
pub(crate) struct HilbertTable {
    h: f64,
    first: i64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    moments: Vec<f64>,
}

impl HilbertTable {
    /// `f`, `df`, `d2f` are samples at `y = (support_first + n) h`; the table extends `pad` beyond.
    pub fn from_samples(h: f64, support_first: i64, f: &[f64], df: &[f64], d2f: &[f64], pad: f64) -> Self {
        let n = f.len() as i64;
        let p = libm::ceil(pad / h) as i64;
        let first = support_first - p;
        let count = (n + 2 * p) as usize;
        let mut values = vec![0.0; count];
        let mut slopes = vec![0.0; count];
        for (slot, i) in (first..first + count as i64).enumerate() {
            let mut hv = 0.0;
            let mut hs = 0.0;
            for (jj, (&fv, &dv)) in f.iter().zip(df).enumerate() {
                let j = support_first + jj as i64;
                if j != i {
                    let w = 1.0 / (j - i) as f64;
                    hv += fv * w;
                    hs += dv * w;
                }
            }
            let local = i - support_first;
            if local >= 0 && local < n {
                hv += h * df[local as usize];
                hs += h * d2f[local as usize];
            }
            values[slot] = hv;
            slopes[slot] = hs;
        }
        let mut moments = vec![0.0; MULTIPOLE_TERMS];
        for (jj, &fv) in f.iter().enumerate() {
            let y = (support_first + jj as i64) as f64 * h;
            let mut pw = h * fv;
            for m in moments.iter_mut() {
                *m += pw;
                pw *= y;
            }
        }
        HilbertTable { h, first, values, slopes, moments }
    }

    fn far(&self, y: f64) -> (f64, f64) {
        let inv = 1.0 / y;
        let mut pw = inv;
        let (mut v, mut d) = (0.0, 0.0);
        for (n, m) in self.moments.iter().enumerate() {
            v -= m * pw;
            pw *= inv;
            d += (n + 1) as f64 * m * pw;
        }
        (v, d)
    }

    /// (Hf(y), (Hf)'(y)).
    pub fn eval_with_slope(&self, y: f64) -> (f64, f64) {
        let u = y / self.h - self.first as f64;
        let last = (self.values.len() - 1) as f64;
        if !(u >= 0.0 && u <= last) {
            return self.far(y);
        }
        let i = (libm::floor(u) as usize).min(self.values.len() - 2);
        let s = u - i as f64;
        if s == 0.0 {
            return (self.values[i], self.slopes[i]);
        }
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.h, self.slopes[i + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * v0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * v1 + (s3 - s2) * m1;
        let deriv = ((6.0 * s2 - 6.0 * s) * v0 + (3.0 * s2 - 4.0 * s + 1.0) * m0 + (-6.0 * s2 + 6.0 * s) * v1 + (3.0 * s2 - 2.0 * s) * m1) / self.h;
        (value, deriv)
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.eval_with_slope(y).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // f(y) = (1 − y²)^4 on [−1, 1]; Hf by adaptive quadrature of the odd part.
    fn bump(y: f64) -> [f64; 3] {
        if y.abs() >= 1.0 {
            return [0.0; 3];
        }
        let u = 1.0 - y * y;
        [u.powi(4), -8.0 * y * u.powi(3), -8.0 * u.powi(3) + 48.0 * y * y * u.powi(2)]
    }

    fn reference(y: f64) -> f64 {
        let odd = |s: f64| if s == 0.0 { 2.0 * bump(y)[1] } else { (bump(y + s)[0] - bump(y - s)[0]) / s };
        let reach = (y.abs() + 1.0).max(1e-3);
        crate::quad::adaptive(&odd, 0.0, reach, 1e-13, 4000).unwrap()
    }

    #[test]
    fn matches_direct_quadrature() {
        let q = 8;
        let h = 1.0 / (1u32 << q) as f64;
        let n = 1 << q;
        let samples: Vec<[f64; 3]> = (-n..=n).map(|m| bump(m as f64 * h)).collect();
        let f: Vec<f64> = samples.iter().map(|s| s[0]).collect();
        let df: Vec<f64> = samples.iter().map(|s| s[1]).collect();
        let d2f: Vec<f64> = samples.iter().map(|s| s[2]).collect();
        let t = HilbertTable::from_samples(h, -n, &f, &df, &d2f, 4.0);
        for &y in &[0.0, 0.3, -0.77, 1.0, 1.9, 3.5, 7.0, -40.0] {
            let err = (t.eval(y) - reference(y)).abs();
            assert!(err < 1e-6, "y={y} err={err}");
        }
    }
}
