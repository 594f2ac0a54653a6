//! Accuracy metrics against ground truth, and the least-squares oracle.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::lstsq::ols;
use crate::model::SwitchingModel;
use crate::swreg::classify_params;

/// Threshold on `||w - theta||` below which a recovery counts as exact.
pub const EXACT_RECOVERY_RADIUS: f64 = 1e-6;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Injective assignment of true modes to estimated ones minimizing
/// `sum_j ||theta_j - w_{m(j)}||^2`. `m(j)` is `None` when there are fewer
/// estimates than true modes and mode `j` is left unmatched (scored against
/// the zero vector). Exhaustive search, first minimum on ties.
pub fn match_modes(estimate: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<Option<usize>> {
    let n = truth.len();
    let slots = estimate.len().max(n);
    let cost = |j: usize, s: usize| -> f64 {
        match estimate.get(s) {
            Some(w) => sq_dist(&truth[j], w),
            None => truth[j].iter().map(|t| t * t).sum(),
        }
    };
    let mut best = (f64::INFINITY, Vec::new());
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; slots];
    fn search(
        j: usize,
        acc: f64,
        n: usize,
        slots: usize,
        cost: &dyn Fn(usize, usize) -> f64,
        used: &mut [bool],
        current: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        if acc >= best.0 {
            return;
        }
        if j == n {
            *best = (acc, current.clone());
            return;
        }
        for s in 0..slots {
            if !used[s] {
                used[s] = true;
                current.push(s);
                search(j + 1, acc + cost(j, s), n, slots, cost, used, current, best);
                current.pop();
                used[s] = false;
            }
        }
    }
    search(0, 0.0, n, slots, &cost, &mut used, &mut current, &mut best);
    best.1.into_iter().map(|s| (s < estimate.len()).then_some(s)).collect()
}

fn check_truth(truth: &[Vec<f64>]) -> Result<()> {
    if truth.is_empty() {
        return Err(Error::MissingGroundTruth("true parameters"));
    }
    if truth.iter().any(|t| t.iter().all(|&v| v == 0.0)) {
        return Err(Error::InvalidParameter("a true parameter vector is zero".into()));
    }
    Ok(())
}

/// `sum_j ||theta_j - w_j||^2 / ||theta_j||^2` after matching the modes with
/// [`match_modes`]. Unmatched true modes contribute 1 each; surplus
/// estimates are ignored.
pub fn nmse(estimate: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<f64> {
    check_truth(truth)?;
    if let Some(w) = estimate.iter().find(|w| w.len() != truth[0].len()) {
        return Err(Error::DimensionMismatch { expected: truth[0].len(), found: w.len() });
    }
    let matching = match_modes(estimate, truth);
    Ok(truth
        .iter()
        .zip(&matching)
        .map(|(t, m)| {
            let norm: f64 = t.iter().map(|v| v * v).sum();
            match m {
                Some(s) => sq_dist(t, &estimate[*s]) / norm,
                None => 1.0,
            }
        })
        .sum())
}

/// NMSE of a switching model against the dataset's true parameters.
pub fn model_nmse(estimate: &SwitchingModel, data: &Dataset) -> Result<f64> {
    let truth = data.true_params().ok_or(Error::MissingGroundTruth("true parameters"))?;
    nmse(&estimate.to_modes(), truth)
}

/// Fraction of points whose estimated mode differs from the true label.
///
/// With true parameters available the modes are matched as in [`nmse`];
/// otherwise the mode permutation minimizing the mismatch is used.
pub fn classification_error(estimate: &SwitchingModel, data: &Dataset) -> Result<f64> {
    let labels = data.true_labels().ok_or(Error::MissingGroundTruth("true labels"))?;
    if estimate.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), found: estimate.dim() });
    }
    let predicted = classify_params(estimate.params(), estimate.modes(), data);
    let mismatch = |to_truth: &[Option<usize>]| -> f64 {
        let wrong = predicted.iter().zip(labels).filter(|(&p, &q)| to_truth[p] != Some(q)).count();
        wrong as f64 / labels.len() as f64
    };
    let m = estimate.modes();
    if let Some(truth) = data.true_params() {
        let matching = match_modes(&estimate.to_modes(), truth);
        let mut to_truth = vec![None; m];
        for (j, s) in matching.iter().enumerate() {
            if let Some(s) = s {
                to_truth[*s] = Some(j);
            }
        }
        return Ok(mismatch(&to_truth));
    }
    let n = labels.iter().max().map_or(1, |q| q + 1).max(m);
    let mut best = f64::INFINITY;
    for perm in permutations(n) {
        let to_truth: Vec<Option<usize>> = perm[..m].iter().map(|&q| Some(q)).collect();
        best = best.min(mismatch(&to_truth));
    }
    Ok(best)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `||w - theta|| < 1e-6`.
pub fn exact_recovery(estimate: &[f64], truth: &[f64]) -> bool {
    estimate.len() == truth.len() && sq_dist(estimate, truth).sqrt() < EXACT_RECOVERY_RADIUS
}

/// Least-squares fits with knowledge of the true classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    pub params: Vec<Vec<f64>>,
    pub nmse: f64,
    pub ce: f64,
}

/// Fits every true mode on its own points by least squares; for data with an
/// outlier mask only the inliers are used.
pub fn oracle(data: &Dataset) -> Result<Oracle> {
    let labels = data.true_labels().ok_or(Error::MissingGroundTruth("true labels"))?;
    let truth = data.true_params().ok_or(Error::MissingGroundTruth("true parameters"))?;
    let mask = data.outlier_mask();
    let mut groups = vec![Vec::new(); truth.len()];
    for (i, &q) in labels.iter().enumerate() {
        if !mask.is_some_and(|m| m[i]) {
            groups[q].push(i);
        }
    }
    let mut params = Vec::with_capacity(truth.len());
    for (j, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::InvalidDataset(format!("mode {} has no points", j + 1)));
        }
        params.push(ols(data, group)?.params);
    }
    let model = SwitchingModel::from_modes(&params)?;
    let nmse = nmse(&params, truth)?;
    let ce = classification_error(&model, data)?;
    Ok(Oracle { params, nmse, ce })
}
