//! Quadrature rules and low-discrepancy sampling.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre over `cells` equal cells of [a, b].
pub fn composite_gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cells: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let h = (b - a) / cells as f64;
    let mut acc = 0.0;
    for c in 0..cells {
        let mid = a + (c as f64 + 0.5) * h;
        let mut cell = 0.0;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            cell += w * f(mid + 0.5 * h * x);
        }
        acc += 0.5 * h * cell;
    }
    acc
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * GK_WK[7];
    let mut g = fc * GK_WG[3];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration with a global error target.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut parts: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(f, a, b);
    parts.push((a, b, v, e));
    loop {
        let (total, err) = parts.iter().fold((0.0, 0.0), |(s, r), p| (s + p.2, r + p.3));
        if !total.is_finite() {
            return Err(Error::Quadrature("non-finite integrand".into()));
        }
        if err <= abs_tol {
            return Ok(total);
        }
        if parts.len() >= max_intervals {
            return Err(Error::Quadrature(alloc::format!(
                "error estimate {err:e} above {abs_tol:e} after {max_intervals} subintervals"
            )));
        }
        let worst = parts
            .iter()
            .enumerate()
            .fold(0, |w, (i, p)| if p.3 > parts[w].3 { i } else { w });
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Adaptive integration over a list of breakpoints, summed in order.
pub fn adaptive_pieces(f: &dyn Fn(f64) -> f64, breaks: &[f64], abs_tol: f64, max_intervals: usize) -> Result<f64> {
    let pieces = breaks.len().saturating_sub(1).max(1);
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        acc += adaptive(f, w[0], w[1], abs_tol / pieces as f64, max_intervals)?;
    }
    Ok(acc)
}

/// `[m_lo, m_hi]` such that `m * step` covers `[a, b]` on the grid anchored at 0.
pub fn aligned_range(a: f64, b: f64, step: f64) -> (i64, i64) {
    (math::ceil(a / step - 1e-9) as i64, math::floor(b / step + 1e-9) as i64)
}

/// Trapezoid sum on the grid `m * step`, for integrands that vanish at the ends.
pub fn grid_sum(f: &dyn Fn(f64) -> f64, a: f64, b: f64, step: f64) -> f64 {
    let (lo, hi) = aligned_range(a, b, step);
    let mut acc = 0.0;
    for m in lo..=hi {
        acc += f(m as f64 * step);
    }
    acc * step
}

/// Largest power of two not exceeding `x`.
pub fn pow2_floor(x: f64) -> f64 {
    math::pow2(math::floor(math::log2(x)) as i32)
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `index` in base `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while index > 0 {
        acc += (index % b) as f64 * f;
        index /= b;
        f *= inv;
    }
    acc
}

/// Point `index` of the Halton sequence in `DIM` dimensions (DIM ≤ 12).
pub fn halton<const DIM: usize>(index: u64) -> [f64; DIM] {
    let mut p = [0.0; DIM];
    for (d, slot) in p.iter_mut().enumerate() {
        *slot = radical_inverse(index, PRIMES[d]);
    }
    p
}
