//! Regression datasets and their CSV representation.
//!
//! A dataset holds `N` regression vectors of a common dimension `d` together
//! with scalar targets. Synthetic datasets additionally carry their ground
//! truth (mode labels, true parameter vectors, outlier flags) so that
//! estimates can be scored.
//!
//! The CSV layout is one row per point with a mandatory header
//! `x_1,...,x_d,y` and an optional trailing `q` column holding 1-based mode
//! labels.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    regressors: Vec<f64>,
    targets: Vec<f64>,
    true_labels: Option<Vec<usize>>,
    true_params: Option<Vec<Vec<f64>>>,
    outlier_mask: Option<Vec<bool>>,
}

impl Dataset {
    /// Builds a dataset from row vectors. Every row must have the same,
    /// nonzero length and there must be one target per row.
    pub fn new(regressors: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self> {
        let dim = regressors
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidDataset("dataset needs at least one point".into()))?;
        let mut flat = Vec::with_capacity(dim * regressors.len());
        for row in &regressors {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(dim, flat, targets)
    }

    /// Builds a dataset from a row-major `N x d` buffer.
    pub fn from_flat(dim: usize, regressors: Vec<f64>, targets: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDataset("regressor dimension must be at least 1".into()));
        }
        if targets.is_empty() {
            return Err(Error::InvalidDataset("dataset needs at least one point".into()));
        }
        if regressors.len() != dim * targets.len() {
            return Err(Error::InvalidDataset(format!(
                "{} regressor entries do not match {} targets of dimension {dim}",
                regressors.len(),
                targets.len()
            )));
        }
        if regressors.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite value".into()));
        }
        Ok(Self {
            dim,
            regressors,
            targets,
            true_labels: None,
            true_params: None,
            outlier_mask: None,
        })
    }

    /// Attaches 0-based mode labels; every label must be below `modes`.
    pub fn with_labels(mut self, labels: Vec<usize>, modes: usize) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} points",
                labels.len(),
                self.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&q| q >= modes) {
            return Err(Error::InvalidDataset(format!(
                "label {} outside 1..={modes}",
                bad + 1
            )));
        }
        self.true_labels = Some(labels);
        Ok(self)
    }

    pub fn with_true_params(mut self, params: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(p) = params.iter().find(|p| p.len() != self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        if let Some(labels) = &self.true_labels {
            if labels.iter().any(|&q| q >= params.len()) {
                return Err(Error::InvalidDataset("labels reference missing parameters".into()));
            }
        }
        self.true_params = Some(params);
        Ok(self)
    }

    pub fn with_outlier_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.len() {
            return Err(Error::InvalidDataset(format!(
                "{} outlier flags for {} points",
                mask.len(),
                self.len()
            )));
        }
        self.outlier_mask = Some(mask);
        Ok(self)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn x(&self, i: usize) -> &[f64] {
        &self.regressors[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn y(&self, i: usize) -> f64 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// 0-based true mode labels, when known.
    pub fn true_labels(&self) -> Option<&[usize]> {
        self.true_labels.as_deref()
    }

    pub fn true_params(&self) -> Option<&[Vec<f64>]> {
        self.true_params.as_deref()
    }

    pub fn outlier_mask(&self) -> Option<&[bool]> {
        self.outlier_mask.as_deref()
    }

    /// `y_i - w . x_i`.
    pub fn residual(&self, i: usize, w: &[f64]) -> Result<f64> {
        if i >= self.len() {
            return Err(Error::InvalidParameter(format!(
                "point index {i} out of range for {} points",
                self.len()
            )));
        }
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: w.len() });
        }
        Ok(self.residual_unchecked(i, w))
    }

    #[inline]
    pub(crate) fn residual_unchecked(&self, i: usize, w: &[f64]) -> f64 {
        self.targets[i] - dot(self.x(i), w)
    }

    /// A dataset restricted to `indices`, keeping the ground truth that is
    /// defined per point.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut flat = Vec::with_capacity(indices.len() * self.dim);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            flat.extend_from_slice(self.x(i));
            targets.push(self.y(i));
        }
        let mut out = Self::from_flat(self.dim, flat, targets)?;
        out.true_labels = self
            .true_labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i]).collect());
        out.outlier_mask = self
            .outlier_mask
            .as_ref()
            .map(|m| indices.iter().map(|&i| m[i]).collect());
        out.true_params = self.true_params.clone();
        Ok(out)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut dim = 0;
        let mut y_col = None;
        let mut q_col = None;
        for (col, name) in headers.iter().enumerate() {
            match name {
                "y" => y_col = Some(col),
                "q" => q_col = Some(col),
                x if x.starts_with("x_") => {
                    if y_col.is_some() {
                        return Err(Error::InvalidDataset("regressor columns must precede y".into()));
                    }
                    dim += 1
                }
                other => return Err(Error::InvalidDataset(format!("unexpected column `{other}`"))),
            }
        }
        let y_col = y_col.ok_or_else(|| Error::InvalidDataset("missing `y` column".into()))?;

        let mut flat = Vec::new();
        let mut targets = Vec::new();
        let mut labels = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let parse = |col: usize| -> Result<f64> {
                let field = record.get(col).unwrap_or_default();
                field
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidDataset(format!("cannot parse `{field}` as a number")))
            };
            for col in 0..dim {
                flat.push(parse(col)?);
            }
            targets.push(parse(y_col)?);
            if let Some(qc) = q_col {
                let field = record.get(qc).unwrap_or_default();
                let q: usize = field
                    .parse()
                    .map_err(|_| Error::InvalidDataset(format!("cannot parse label `{field}`")))?;
                if q == 0 {
                    return Err(Error::InvalidDataset("labels are 1-based".into()));
                }
                labels.push(q - 1);
            }
        }
        let ds = Self::from_flat(dim, flat, targets)?;
        if q_col.is_some() {
            let modes = labels.iter().max().map_or(1, |m| m + 1);
            ds.with_labels(labels, modes)
        } else {
            Ok(ds)
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("x_{k}")).collect();
        header.push("y".into());
        if self.true_labels.is_some() {
            header.push("q".into());
        }
        wtr.write_record(&header)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.x(i).iter().map(|v| format!("{v:?}")).collect();
            row.push(format!("{:?}", self.y(i)));
            if let Some(labels) = &self.true_labels {
                row.push((labels[i] + 1).to_string());
            }
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
