//! Closed-form interval brackets over boxes.
//!
//! For a box `[u, v]` and a regressor `x`, the dot product `w . x` ranges
//! over `[u . x + L, u . x + U]` with `L = (v - u) . min(x, 0)` and
//! `U = (v - u) . max(x, 0)`. The residual `y - w . x` therefore ranges over
//! `[e(u) - U, e(u) - L]`, and the squared residual's extremes over the box
//! follow from the sign pattern of that interval. Every lower bound in the
//! crate is assembled from these quantities.

use crate::dataset::{dot, Dataset};
use crate::error::{Error, Result};
use crate::region::BoxRegion;

/// Range of `w . x` over a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotRange {
    /// `(v - u) . (x)_-`, never positive.
    pub low_offset: f64,
    /// `(v - u) . (x)_+`, never negative.
    pub high_offset: f64,
    pub min: f64,
    pub max: f64,
}

pub fn dot_range(lower: &[f64], upper: &[f64], x: &[f64]) -> Result<DotRange> {
    if lower.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: lower.len(), found: x.len() });
    }
    if upper.len() != x.len() {
        return Err(Error::DimensionMismatch { expected: upper.len(), found: x.len() });
    }
    Ok(dot_range_unchecked(lower, upper, x))
}

#[inline]
pub(crate) fn dot_range_unchecked(lower: &[f64], upper: &[f64], x: &[f64]) -> DotRange {
    let mut low = 0.0;
    let mut high = 0.0;
    let mut base = 0.0;
    for k in 0..x.len() {
        let width = upper[k] - lower[k];
        let xk = x[k];
        base += lower[k] * xk;
        if xk < 0.0 {
            low += width * xk;
        } else {
            high += width * xk;
        }
    }
    DotRange { low_offset: low, high_offset: high, min: base + low, max: base + high }
}

/// Range `[min, max]` of the residual `y - w . x` over a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRange {
    pub min: f64,
    pub max: f64,
}

/// Residual range from the residual at the base point and the dot-product
/// offsets `L <= 0 <= U`.
#[inline]
pub fn residual_bracket(e_at_base: f64, low_offset: f64, high_offset: f64) -> ResidualRange {
    ResidualRange { min: e_at_base - high_offset, max: e_at_base - low_offset }
}

/// Smallest squared residual over the box: zero when the range straddles 0.
#[inline]
pub fn min_sq_residual(min: f64, max: f64) -> f64 {
    let pos = min.max(0.0);
    let neg = max.min(0.0);
    pos * pos + neg * neg
}

#[inline]
pub fn max_sq_residual(min: f64, max: f64) -> f64 {
    (min * min).max(max * max)
}

impl ResidualRange {
    #[inline]
    pub fn min_sq(&self) -> f64 {
        min_sq_residual(self.min, self.max)
    }

    #[inline]
    pub fn max_sq(&self) -> f64 {
        max_sq_residual(self.min, self.max)
    }
}

/// Per-point, per-mode residual ranges over one node's box.
///
/// Entries are indexed by position in the point list handed to
/// [`ResidualBracket::compute`], not by dataset index.
#[derive(Debug, Clone)]
pub struct ResidualBracket {
    modes: usize,
    points: Vec<usize>,
    ranges: Vec<ResidualRange>,
    offsets: Vec<(f64, f64)>,
}

impl ResidualBracket {
    /// Brackets the residuals of `points` for each of the `modes` sub-boxes of
    /// `region` (dimension `modes * data.dim()`).
    pub fn compute(data: &Dataset, region: &BoxRegion, modes: usize, points: &[usize]) -> Result<Self> {
        let d = data.dim();
        if region.dim() != modes * d {
            return Err(Error::DimensionMismatch { expected: modes * d, found: region.dim() });
        }
        Ok(Self::compute_unchecked(data, region, modes, points))
    }

    pub(crate) fn compute_unchecked(data: &Dataset, region: &BoxRegion, modes: usize, points: &[usize]) -> Self {
        let d = data.dim();
        let mut ranges = Vec::with_capacity(points.len() * modes);
        let mut offsets = Vec::with_capacity(points.len() * modes);
        for &i in points {
            let x = data.x(i);
            let y = data.y(i);
            for j in 0..modes {
                let (lo, hi) = region.sub(j, d);
                let dr = dot_range_unchecked(lo, hi, x);
                let e_base = y - dot(lo, x);
                ranges.push(residual_bracket(e_base, dr.low_offset, dr.high_offset));
                offsets.push((dr.low_offset, dr.high_offset));
            }
        }
        Self { modes, points: points.to_vec(), ranges, offsets }
    }

    #[inline]
    pub fn modes(&self) -> usize {
        self.modes
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Dataset index of entry `k`.
    #[inline]
    pub fn point(&self, k: usize) -> usize {
        self.points[k]
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    #[inline]
    pub fn range(&self, k: usize, j: usize) -> ResidualRange {
        self.ranges[k * self.modes + j]
    }

    /// `(L, U)` offsets for entry `k` and mode `j`.
    #[inline]
    pub fn offsets(&self, k: usize, j: usize) -> (f64, f64) {
        self.offsets[k * self.modes + j]
    }

    #[inline]
    pub fn min_sq(&self, k: usize, j: usize) -> f64 {
        self.range(k, j).min_sq()
    }

    #[inline]
    pub fn max_sq(&self, k: usize, j: usize) -> f64 {
        self.range(k, j).max_sq()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_range_examples() {
        let r = dot_range(&[0.0, 0.0], &[1.0, 1.0], &[2.0, -3.0]).unwrap();
        assert_eq!((r.low_offset, r.high_offset, r.min, r.max), (-3.0, 2.0, -3.0, 2.0));
        // Offsets are measured from the base point u, so a positive x gives
        // L = 0 and U = (v - u) . x; the range itself is symmetric.
        let r = dot_range(&[-1.0, -1.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!((r.low_offset, r.high_offset, r.min, r.max), (0.0, 4.0, -2.0, 2.0));
        let r = dot_range(&[0.5, -2.0], &[0.5, -2.0], &[3.0, 1.0]).unwrap();
        assert_eq!((r.low_offset, r.high_offset), (0.0, 0.0));
        assert_eq!(r.min, -0.5);
        assert_eq!(r.max, -0.5);
        assert!(dot_range(&[0.0], &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn residual_bracket_examples() {
        assert_eq!(residual_bracket(1.0, -3.0, 2.0), ResidualRange { min: -1.0, max: 4.0 });
        assert_eq!(residual_bracket(5.0, -3.0, 2.0), ResidualRange { min: 3.0, max: 8.0 });
        assert_eq!(residual_bracket(0.7, 0.0, 0.0), ResidualRange { min: 0.7, max: 0.7 });
    }

    #[test]
    fn squared_extremes() {
        assert_eq!(min_sq_residual(-1.0, 4.0), 0.0);
        assert_eq!(min_sq_residual(3.0, 8.0), 9.0);
        assert_eq!(min_sq_residual(-4.0, -2.0), 4.0);
        assert_eq!(max_sq_residual(-1.0, 4.0), 16.0);
        assert_eq!(max_sq_residual(0.0, 0.0), 0.0);
        assert_eq!(max_sq_residual(-4.0, -2.0), 16.0);
    }

    #[test]
    fn bracket_shifts_with_targets() {
        let a = residual_bracket(1.25, -0.5, 2.0);
        let b = residual_bracket(1.25 + 3.0, -0.5, 2.0);
        assert_eq!(b.min - a.min, 3.0);
        assert_eq!(b.max - a.max, 3.0);
    }
}
