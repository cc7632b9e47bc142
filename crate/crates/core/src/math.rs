//! Thin wrappers so call sites read like std float methods.

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}
pub(crate) fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}
pub(crate) fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
pub(crate) fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}
pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[cfg(test)]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}
pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
pub(crate) fn round(x: f64) -> f64 {
    libm::round(x)
}
/// Exact power of two.
pub(crate) fn pow2(e: i32) -> f64 {
    libm::scalbn(1.0, e)
}
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Solves `a x = b` (row-major `n × n`) by Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: alloc::vec::Vec<f64>, mut b: alloc::vec::Vec<f64>) -> Option<alloc::vec::Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * x[k];
        }
        x[row] = acc / a[row * n + row];
    }
    Some(x)
}
