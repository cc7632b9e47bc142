//! Interval geometry and lagom interval families.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{arg, Error, Result};
use crate::math;

/// Closed interval stored as center and length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub center: f64,
    pub length: f64,
}

impl Interval {
    pub fn new(center: f64, length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() || !center.is_finite() {
            return Err(arg(format!("interval needs finite center and positive length, got ({center}, {length})")));
        }
        Ok(Interval { center, length })
    }

    pub fn from_endpoints(a: f64, b: f64) -> Result<Self> {
        Interval::new(0.5 * (a + b), b - a)
    }

    /// The centered ball B_λ = [-λ/2, λ/2].
    pub fn ball(lambda: f64) -> Self {
        Interval { center: 0.0, length: lambda }
    }

    pub fn left(&self) -> f64 {
        self.center - 0.5 * self.length
    }

    pub fn right(&self) -> f64 {
        self.center + 0.5 * self.length
    }

    pub fn contains(&self, x: f64) -> bool {
        self.left() <= x && x <= self.right()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.left() <= other.left() && other.right() <= self.right()
    }

    /// Same center, length multiplied by `lambda`.
    pub fn dilate(&self, lambda: f64) -> Self {
        Interval { center: self.center, length: self.length * lambda }
    }

    /// Smallest interval containing both.
    pub fn hull(&self, other: &Interval) -> Self {
        let a = self.left().min(other.left());
        let b = self.right().max(other.right());
        Interval { center: 0.5 * (a + b), length: b - a }
    }

    /// Polynomial weight 1 + |x - c(I)| / |I|.
    pub fn weight(&self, x: f64) -> f64 {
        1.0 + (x - self.center).abs() / self.length
    }
}

/// Length of the smallest interval containing I ∪ J.
pub fn diam_union(i: &Interval, j: &Interval) -> f64 {
    i.right().max(j.right()) - i.left().min(j.left())
}

/// Hull length over the larger of the two lengths; always ≥ 1.
pub fn rdist(i: &Interval, j: &Interval) -> f64 {
    (diam_union(i, j) / i.length.max(j.length)).max(1.0)
}

/// Ratio of the smaller length to the larger one.
pub fn ec(i: &Interval, j: &Interval) -> f64 {
    i.length.min(j.length) / i.length.max(j.length)
}

/// Membership in the lagom family D_M.
pub fn is_lagom(i: &Interval, m: u32) -> bool {
    let big = math::pow2(m as i32);
    let small = math::pow2(-(m as i32));
    small <= i.length && i.length <= big && rdist(i, &Interval::ball(big)) <= m as f64
}

/// The dyadic interval 2^{-j}[k, k+1].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    pub j: i32,
    pub k: i64,
}

impl Ord for DyadicInterval {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.j, self.k).cmp(&(other.j, other.k))
    }
}

impl PartialOrd for DyadicInterval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl DyadicInterval {
    pub fn new(j: i32, k: i64) -> Self {
        DyadicInterval { j, k }
    }

    pub fn length(&self) -> f64 {
        math::pow2(-self.j)
    }

    pub fn left(&self) -> f64 {
        self.k as f64 * self.length()
    }

    pub fn right(&self) -> f64 {
        (self.k + 1) as f64 * self.length()
    }

    pub fn center(&self) -> f64 {
        (self.k as f64 + 0.5) * self.length()
    }

    pub fn interval(&self) -> Interval {
        Interval { center: self.center(), length: self.length() }
    }

    /// Dyadic containment (I ⊆ self).
    pub fn contains(&self, other: &DyadicInterval) -> bool {
        if other.j < self.j {
            return false;
        }
        let shift = (other.j - self.j) as u32;
        other.k.div_euclid(1i64 << shift) == self.k
    }

    pub fn parent(&self) -> DyadicInterval {
        DyadicInterval { j: self.j - 1, k: self.k.div_euclid(2) }
    }

    /// The half-open dyadic cell at scale `j` containing `x`.
    pub fn containing(x: f64, j: i32) -> DyadicInterval {
        DyadicInterval { j, k: math::floor(x * math::pow2(j)) as i64 }
    }
}

/// Finite analysis window: scales `j_min..=j_max`, intervals meeting (-R, R).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LagomWindow {
    pub m: u32,
    pub radius: f64,
    pub j_min: i32,
    pub j_max: i32,
}

/// Default cap on the number of intervals a window may enumerate.
pub const WINDOW_CAP: usize = 4096;

impl Default for LagomWindow {
    fn default() -> Self {
        LagomWindow { m: 4, radius: 2.0, j_min: -5, j_max: 5 }
    }
}

impl LagomWindow {
    pub fn new(m: u32, radius: f64, j_min: i32, j_max: i32) -> Result<Self> {
        if m == 0 {
            return Err(arg("window M must be at least 1"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(arg(format!("window radius must be positive, got {radius}")));
        }
        Ok(LagomWindow { m, radius, j_min, j_max })
    }

    /// Every dyadic interval of the window, sorted by (j, k), no duplicates.
    pub fn intervals(&self) -> Result<Vec<DyadicInterval>> {
        self.intervals_capped(WINDOW_CAP)
    }

    pub fn intervals_capped(&self, cap: usize) -> Result<Vec<DyadicInterval>> {
        let mut out = Vec::new();
        for j in self.j_min..=self.j_max {
            let len = math::pow2(-j);
            // open intersection with (-R, R): left < R and right > -R
            let k_lo = math::floor(-self.radius / len) as i64;
            let k_hi = math::ceil(self.radius / len) as i64 - 1;
            let count = (k_hi - k_lo + 1).max(0) as usize;
            if out.len() + count > cap {
                return Err(Error::WindowTooLarge { count: out.len() + count, cap });
            }
            out.extend((k_lo..=k_hi).map(|k| DyadicInterval::new(j, k)));
        }
        Ok(out)
    }

    /// Same window with one extra scale on each side.
    pub fn grown(&self) -> LagomWindow {
        LagomWindow { j_min: self.j_min - 1, j_max: self.j_max + 1, ..*self }
    }
}

/// Lagom members of the window at the window's own M.
pub fn enum_lagom(w: &LagomWindow) -> Result<Vec<DyadicInterval>> {
    Ok(w.intervals()?.into_iter().filter(|d| is_lagom(&d.interval(), w.m)).collect())
}

/// Finest scale searched by [`smallest_dyadic_containing`].
pub const FINEST_SCALE: i32 = 40;

/// Minimal dyadic interval at scale ≥ `j_min` containing every point.
pub fn smallest_dyadic_containing(points: &[f64], j_min: i32) -> Result<DyadicInterval> {
    if points.is_empty() {
        return Err(arg("no points given"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(arg("points must be finite"));
    }
    let mut j = FINEST_SCALE;
    while j >= j_min {
        let first = DyadicInterval::containing(points[0], j);
        if points.iter().all(|&p| DyadicInterval::containing(p, j) == first) {
            return Ok(first);
        }
        j -= 1;
    }
    Err(Error::Range(format!("no dyadic interval at scale >= {j_min} holds all points")))
}
