use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` linear submodels of dimension `d`, stored concatenated as one vector
/// of length `n d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingModel {
    modes: usize,
    dim: usize,
    params: Vec<f64>,
}

impl SwitchingModel {
    pub fn new(modes: usize, dim: usize, params: Vec<f64>) -> Result<Self> {
        if modes == 0 || dim == 0 {
            return Err(Error::InvalidParameter("mode count and dimension must be positive".into()));
        }
        if params.len() != modes * dim {
            return Err(Error::DimensionMismatch { expected: modes * dim, found: params.len() });
        }
        Ok(Self { modes, dim, params })
    }

    pub fn from_modes(modes: &[Vec<f64>]) -> Result<Self> {
        let dim = modes
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidParameter("no modes given".into()))?;
        if let Some(m) = modes.iter().find(|m| m.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: m.len() });
        }
        Self::new(modes.len(), dim, modes.concat())
    }

    #[inline]
    pub fn modes(&self) -> usize {
        self.modes
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn mode(&self, j: usize) -> &[f64] {
        &self.params[j * self.dim..(j + 1) * self.dim]
    }

    pub fn mode_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.params[j * self.dim..(j + 1) * self.dim]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn into_params(self) -> Vec<f64> {
        self.params
    }

    pub fn to_modes(&self) -> Vec<Vec<f64>> {
        self.params.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// Permutes the submodels so that their first coordinates are
    /// nondecreasing. Equal first coordinates keep their relative order.
    pub fn canonicalize(&self) -> Self {
        let mut order: Vec<usize> = (0..self.modes).collect();
        order.sort_by(|&a, &b| self.mode(a)[0].total_cmp(&self.mode(b)[0]));
        let params = order.iter().flat_map(|&j| self.mode(j).iter().copied()).collect();
        Self { modes: self.modes, dim: self.dim, params }
    }

    pub fn is_canonical(&self) -> bool {
        (1..self.modes).all(|j| self.mode(j - 1)[0] <= self.mode(j)[0])
    }
}

/// Cost functions handled by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    /// Sum over points of the smallest squared residual among the modes.
    SquaredSwitching,
    /// `min(e^2, eps^2)` per point.
    SaturatedSquared { eps: f64 },
    /// `1[|e| > eps]` per point.
    SaturatedZeroOne { eps: f64 },
}

impl LossKind {
    /// Saturated loss for exponent `p` in `{0, 2}`.
    pub fn saturated(p: u32, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        match p {
            0 => Ok(Self::SaturatedZeroOne { eps }),
            2 => Ok(Self::SaturatedSquared { eps }),
            _ => Err(Error::InvalidParameter(format!("saturated loss exponent must be 0 or 2, got {p}"))),
        }
    }

    pub fn eps(&self) -> Option<f64> {
        match *self {
            Self::SquaredSwitching => None,
            Self::SaturatedSquared { eps } | Self::SaturatedZeroOne { eps } => Some(eps),
        }
    }

    /// Loss of a single residual.
    pub fn point_loss(&self, e: f64) -> f64 {
        match *self {
            Self::SquaredSwitching => e * e,
            Self::SaturatedSquared { eps } => (e * e).min(eps * eps),
            Self::SaturatedZeroOne { eps } => {
                if e.abs() > eps {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}
