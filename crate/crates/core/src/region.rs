use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lower, upper]` in `R^D`.
///
/// Switching problems read it as a product of `n` sub-boxes of dimension
/// `d`; [`BoxRegion::sub`] returns borrowed slices for mode `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        if lower.is_empty() {
            return Err(Error::InvalidBox("box needs at least one dimension".into()));
        }
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(Error::InvalidBox("non-finite bound".into()));
        }
        if let Some(k) = (0..lower.len()).find(|&k| lower[k] > upper[k]) {
            return Err(Error::InvalidBox(format!(
                "lower bound {} exceeds upper bound {} on side {k}",
                lower[k], upper[k]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `[-half_width, half_width]^dim`.
    pub fn symmetric(dim: usize, half_width: f64) -> Result<Self> {
        if !(half_width >= 0.0) {
            return Err(Error::InvalidBox(format!("half width {half_width} must be nonnegative")));
        }
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    #[inline]
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    #[inline]
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub(crate) fn lower_mut(&mut self) -> &mut [f64] {
        &mut self.lower
    }

    pub(crate) fn upper_mut(&mut self) -> &mut [f64] {
        &mut self.upper
    }

    /// Sub-box of mode `j` when the box lives in `R^{n d}`.
    #[inline]
    pub fn sub(&self, j: usize, d: usize) -> (&[f64], &[f64]) {
        (&self.lower[j * d..(j + 1) * d], &self.upper[j * d..(j + 1) * d])
    }

    /// True when some lower bound exceeds its upper bound.
    pub fn is_empty(&self) -> bool {
        self.lower.iter().zip(&self.upper).any(|(l, u)| l > u)
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.dim()
            && w.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *l <= *x && *x <= *u)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l)
    }

    /// Index of the longest side, first in index order on ties.
    pub fn longest_side(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (k, w) in self.widths().enumerate() {
            if w > best.1 {
                best = (k, w);
            }
        }
        best
    }

    /// Halves the box along side `k`: lower half first.
    pub fn bisect(&self, k: usize) -> (BoxRegion, BoxRegion) {
        let mid = 0.5 * (self.lower[k] + self.upper[k]);
        let mut first = self.clone();
        let mut second = self.clone();
        first.upper[k] = mid;
        second.lower[k] = mid;
        (first, second)
    }

    /// Plain bisection along the longest side.
    pub fn split_longest(&self) -> Result<(BoxRegion, BoxRegion)> {
        let (k, w) = self.longest_side();
        if !(w > 0.0) {
            return Err(Error::ZeroVolume);
        }
        Ok(self.bisect(k))
    }
}
