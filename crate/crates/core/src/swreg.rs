//! Switching linear regression.
//!
//! The cost of a concatenated parameter vector `w = (w_1, ..., w_n)` is
//! `sum_i min_j (y_i - w_j . x_i)^2`, i.e. every point is charged to the mode
//! that fits it best. Permuting the modes leaves the cost unchanged, so the
//! search is restricted to `w_{1,1} <= ... <= w_{n,1}` and the split rule
//! trims the parts of a box that violate this ordering.
//!
//! Lower bounds come in stages of increasing cost:
//! 1. pointwise: each point independently picks its best mode and its best
//!    parameters in the box ([`lower_pointwise`]);
//! 2. constant classification: points whose mode cannot change over the box
//!    are grouped per mode ([`constant_classification_sets`]) and each group
//!    is charged either its pointwise sum or, for the staged modes, a
//!    box-constrained least-squares fit ([`lower_classification`]).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bnb::{self, Candidate, Problem, SolveOptions};
use crate::bounds::ResidualBracket;
use crate::dataset::{dot, Dataset};
use crate::error::{Error, Result};
use crate::lstsq::{box_ls_unchecked, ols};
use crate::model::SwitchingModel;
use crate::region::BoxRegion;
use crate::report::SolveReport;

fn check_model(model: &SwitchingModel, data: &Dataset) -> Result<()> {
    if model.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), found: model.dim() });
    }
    Ok(())
}

/// Index of the mode with the smallest squared residual, smallest index on ties.
#[inline]
fn best_mode(params: &[f64], modes: usize, x: &[f64], y: f64) -> (usize, f64) {
    let d = x.len();
    let mut best = (0, f64::INFINITY);
    for j in 0..modes {
        let e = y - dot(&params[j * d..(j + 1) * d], x);
        let sq = e * e;
        if sq < best.1 {
            best = (j, sq);
        }
    }
    best
}

/// 0-based mode labels `argmin_j (y_i - w_j . x_i)^2`.
pub fn classify(model: &SwitchingModel, data: &Dataset) -> Result<Vec<usize>> {
    check_model(model, data)?;
    Ok(classify_params(model.params(), model.modes(), data))
}

pub(crate) fn classify_params(params: &[f64], modes: usize, data: &Dataset) -> Vec<usize> {
    (0..data.len()).map(|i| best_mode(params, modes, data.x(i), data.y(i)).0).collect()
}

pub fn cost_sw(model: &SwitchingModel, data: &Dataset) -> Result<f64> {
    check_model(model, data)?;
    Ok(cost_sw_params(model.params(), model.modes(), data))
}

pub(crate) fn cost_sw_params(params: &[f64], modes: usize, data: &Dataset) -> f64 {
    (0..data.len()).map(|i| best_mode(params, modes, data.x(i), data.y(i)).1).sum()
}

/// Sum of squared residuals under a fixed 0-based assignment.
pub fn cost_sw_assigned(model: &SwitchingModel, labels: &[usize], data: &Dataset) -> Result<f64> {
    check_model(model, data)?;
    if labels.len() != data.len() {
        return Err(Error::InvalidParameter(format!("{} labels for {} points", labels.len(), data.len())));
    }
    if let Some(&q) = labels.iter().find(|&&q| q >= model.modes()) {
        return Err(Error::InvalidParameter(format!("label {} outside 1..={}", q + 1, model.modes())));
    }
    Ok(labels
        .iter()
        .enumerate()
        .map(|(i, &q)| {
            let e = data.y(i) - dot(model.mode(q), data.x(i));
            e * e
        })
        .sum())
}

/// Bisects the longest side (first on ties) and, when that side is the first
/// coordinate of a mode, trims both halves so that the ordering
/// `w_{j,1} <= w_{j+1,1}` stays satisfiable. A child can come back empty.
pub fn split_symmetric(region: &BoxRegion, modes: usize, d: usize) -> Result<(BoxRegion, BoxRegion)> {
    if region.dim() != modes * d {
        return Err(Error::DimensionMismatch { expected: modes * d, found: region.dim() });
    }
    let (side, width) = region.longest_side();
    if !(width > 0.0) {
        return Err(Error::ZeroVolume);
    }
    let (mut first, mut second) = region.bisect(side);
    let (jstar, kstar) = (side / d, side % d);
    if kstar == 0 {
        let v = first.upper_mut();
        for j in (0..jstar).rev() {
            v[j * d] = v[j * d].min(v[(j + 1) * d]);
        }
        let u = second.lower_mut();
        for j in jstar + 1..modes {
            u[j * d] = u[j * d].max(u[(j - 1) * d]);
        }
    }
    Ok((first, second))
}

/// Pointwise lower bound: `sum_i min_j min_{w_j in B_j} e_i(w_j)^2`.
pub fn lower_pointwise(brackets: &ResidualBracket) -> f64 {
    (0..brackets.len())
        .map(|k| (0..brackets.modes()).map(|j| brackets.min_sq(k, j)).fold(f64::INFINITY, f64::min))
        .sum()
}

/// Partition of the points by whether their classification is fixed over a box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeIndexSets {
    /// Points whose best mode can change within the box.
    pub undecided: Vec<usize>,
    /// `fixed[j]`: points classified as mode `j` for every parameter in the box.
    pub fixed: Vec<Vec<usize>>,
}

impl ModeIndexSets {
    pub fn total(&self) -> usize {
        self.undecided.len() + self.fixed.iter().map(Vec::len).sum::<usize>()
    }
}

/// Which mode, if any, point `k` is bound to over the whole box.
#[inline]
fn constant_mode(brackets: &ResidualBracket, k: usize) -> Option<usize> {
    let n = brackets.modes();
    'modes: for j in 0..n {
        let worst = brackets.max_sq(k, j);
        for other in 0..n {
            if other == j {
                continue;
            }
            let best_other = brackets.min_sq(k, other);
            let ok = if other < j { worst < best_other } else { worst <= best_other };
            if !ok {
                continue 'modes;
            }
        }
        return Some(j);
    }
    None
}

/// Constant-classification sets, as dataset indexes.
pub fn constant_classification_sets(brackets: &ResidualBracket) -> ModeIndexSets {
    let mut sets = ModeIndexSets { undecided: Vec::new(), fixed: vec![Vec::new(); brackets.modes()] };
    for k in 0..brackets.len() {
        match constant_mode(brackets, k) {
            Some(j) => sets.fixed[j].push(brackets.point(k)),
            None => sets.undecided.push(brackets.point(k)),
        }
    }
    sets
}

fn pointwise_min(brackets: &ResidualBracket, k: usize) -> f64 {
    (0..brackets.modes()).map(|j| brackets.min_sq(k, j)).fold(f64::INFINITY, f64::min)
}

fn mode_pointwise(brackets: &ResidualBracket, j: usize, points: &[usize]) -> f64 {
    points.iter().map(|&k| brackets.min_sq(k, j)).sum()
}

fn mode_box_ls(data: &Dataset, region: &BoxRegion, j: usize, points: &[usize]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let (lo, hi) = region.sub(j, data.dim());
    box_ls_unchecked(data, points, lo, hi).value
}

/// Classification-based lower bound. Modes with `staged[j]` set are charged
/// a box-constrained least-squares fit over their fixed points; the others
/// their pointwise minima. `brackets` must cover every point of `data` in
/// order.
pub fn lower_classification(
    region: &BoxRegion,
    sets: &ModeIndexSets,
    staged: &[bool],
    data: &Dataset,
    brackets: &ResidualBracket,
) -> Result<f64> {
    let n = brackets.modes();
    if staged.len() != n || sets.fixed.len() != n {
        return Err(Error::InvalidParameter("staged set and index sets must cover every mode".into()));
    }
    if region.dim() != n * data.dim() {
        return Err(Error::DimensionMismatch { expected: n * data.dim(), found: region.dim() });
    }
    if brackets.len() != data.len() || brackets.points().iter().enumerate().any(|(k, &i)| k != i) {
        return Err(Error::InvalidParameter("brackets must cover every point in order".into()));
    }
    let mut value: f64 = sets.undecided.iter().map(|&k| pointwise_min(brackets, k)).sum();
    for j in 0..n {
        let pointwise = mode_pointwise(brackets, j, &sets.fixed[j]);
        value += if staged[j] {
            mode_box_ls(data, region, j, &sets.fixed[j]).max(pointwise)
        } else {
            pointwise
        };
    }
    Ok(value)
}

/// Result of the alternating heuristic.
#[derive(Debug, Clone)]
pub struct KLinReg {
    pub model: SwitchingModel,
    pub cost: f64,
    pub iterations: usize,
    /// Cost after each iteration, starting with the initial model.
    pub costs: Vec<f64>,
}

/// Alternates classification and per-mode least squares until the labels
/// stop changing or `max_iter` iterations ran. A mode left without points
/// keeps its previous parameters.
pub fn klinreg(data: &Dataset, init: &SwitchingModel, max_iter: usize) -> Result<KLinReg> {
    check_model(init, data)?;
    let n = init.modes();
    let mut model = init.clone();
    let mut labels = classify_params(model.params(), n, data);
    let mut costs = vec![cost_sw_params(model.params(), n, data)];
    let mut iterations = 0;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    while iterations < max_iter {
        iterations += 1;
        groups.iter_mut().for_each(Vec::clear);
        for (i, &q) in labels.iter().enumerate() {
            groups[q].push(i);
        }
        for (j, group) in groups.iter().enumerate() {
            if !group.is_empty() {
                let fit = ols(data, group)?;
                model.mode_mut(j).copy_from_slice(&fit.params);
            }
        }
        let next = classify_params(model.params(), n, data);
        costs.push(cost_sw_params(model.params(), n, data));
        if next == labels {
            break;
        }
        labels = next;
    }
    let cost = *costs.last().expect("initial cost recorded");
    Ok(KLinReg { model, cost, iterations, costs })
}

/// Switching regression as a branch-and-bound problem over `R^{n d}`.
pub struct SwitchingRegression<'a> {
    data: &'a Dataset,
    modes: usize,
    init_box: BoxRegion,
    heuristic_iters: usize,
}

impl<'a> SwitchingRegression<'a> {
    pub fn new(data: &'a Dataset, modes: usize, init_box: BoxRegion) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("at least one mode is required".into()));
        }
        if init_box.dim() != modes * data.dim() {
            return Err(Error::DimensionMismatch { expected: modes * data.dim(), found: init_box.dim() });
        }
        Ok(Self { data, modes, init_box, heuristic_iters: 100 })
    }

    pub fn with_heuristic_iters(mut self, iters: usize) -> Self {
        self.heuristic_iters = iters;
        self
    }

    pub fn init_box(&self) -> &BoxRegion {
        &self.init_box
    }

    fn brackets(&self, region: &BoxRegion) -> ResidualBracket {
        let all: Vec<usize> = (0..self.data.len()).collect();
        ResidualBracket::compute_unchecked(self.data, region, self.modes, &all)
    }

    fn model(&self, params: Vec<f64>) -> SwitchingModel {
        SwitchingModel::new(self.modes, self.data.dim(), params).expect("dimensions checked at construction")
    }

    /// Base-point cost, improved on refresh iterations by the alternating
    /// heuristic started at the box center. The returned point is always
    /// canonical and inside the initial box.
    pub fn upper_sw(&self, region: &BoxRegion, refresh: bool) -> Candidate {
        let base = self.model(region.lower().to_vec()).canonicalize();
        let mut best = Candidate {
            value: cost_sw_params(base.params(), self.modes, self.data),
            point: base.into_params(),
        };
        if refresh {
            if let Some(c) = self.heuristic_from(region.center()) {
                if c.value < best.value {
                    best = c;
                }
            }
        }
        best
    }

    fn heuristic_from(&self, start: Vec<f64>) -> Option<Candidate> {
        let init = self.model(start).canonicalize();
        let run = klinreg(self.data, &init, self.heuristic_iters).ok()?;
        let model = run.model.canonicalize();
        self.init_box
            .contains(model.params())
            .then(|| Candidate { value: run.cost, point: model.into_params() })
    }

    /// Best of `restarts` heuristic runs started uniformly in the initial box.
    pub fn initial_guess(&self, restarts: usize, seed: u64) -> Option<Candidate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<Candidate> = None;
        for _ in 0..restarts {
            let start: Vec<f64> = self
                .init_box
                .lower()
                .iter()
                .zip(self.init_box.upper())
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect();
            if let Some(c) = self.heuristic_from(start) {
                if best.as_ref().is_none_or(|b| c.value < b.value) {
                    best = Some(c);
                }
            }
        }
        best
    }
}

impl Problem for SwitchingRegression<'_> {
    fn dim(&self) -> usize {
        self.modes * self.data.dim()
    }

    fn evaluate(&self, w: &[f64]) -> f64 {
        cost_sw_params(w, self.modes, self.data)
    }

    fn split(&self, region: &BoxRegion) -> Result<(BoxRegion, BoxRegion)> {
        split_symmetric(region, self.modes, self.data.dim())
    }

    fn upper(&self, region: &BoxRegion, refresh: bool) -> Candidate {
        self.upper_sw(region, refresh)
    }

    fn lower(&self, region: &BoxRegion, incumbent: f64) -> f64 {
        let stop = bnb::prune_threshold(incumbent);
        let brackets = self.brackets(region);
        let pointwise = lower_pointwise(&brackets);
        if pointwise > stop {
            return pointwise;
        }
        let sets = constant_classification_sets(&brackets);
        let mut per_mode: Vec<f64> =
            (0..self.modes).map(|j| mode_pointwise(&brackets, j, &sets.fixed[j])).collect();
        let undecided: f64 = sets.undecided.iter().map(|&k| pointwise_min(&brackets, k)).sum();
        let mut value = undecided + per_mode.iter().sum::<f64>();
        if value > stop {
            return value;
        }
        // Stage modes by decreasing number of fixed points.
        let mut order: Vec<usize> = (0..self.modes).filter(|&j| !sets.fixed[j].is_empty()).collect();
        order.sort_by_key(|&j| std::cmp::Reverse(sets.fixed[j].len()));
        for j in order {
            let fit = mode_box_ls(self.data, region, j, &sets.fixed[j]);
            if fit > per_mode[j] {
                value += fit - per_mode[j];
                per_mode[j] = fit;
            }
            if value > stop {
                break;
            }
        }
        value.max(pointwise)
    }
}

#[derive(Debug, Clone)]
pub struct SwitchingOptions {
    /// Initial box; `[-10, 10]^{n d}` when unset.
    pub init_box: Option<BoxRegion>,
    pub restarts: usize,
    pub heuristic_iters: usize,
    pub seed: u64,
    pub engine: SolveOptions,
}

impl Default for SwitchingOptions {
    fn default() -> Self {
        Self { init_box: None, restarts: 100, heuristic_iters: 100, seed: 0, engine: SolveOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct SwitchingSolution {
    pub model: SwitchingModel,
    pub report: SolveReport,
}

/// Globally minimizes the switching cost with `modes` submodels.
pub fn solve_switching(data: &Dataset, modes: usize, options: &SwitchingOptions) -> Result<SwitchingSolution> {
    let init_box = match &options.init_box {
        Some(b) => b.clone(),
        None => BoxRegion::symmetric(modes * data.dim(), 10.0)?,
    };
    let problem = SwitchingRegression::new(data, modes, init_box)?.with_heuristic_iters(options.heuristic_iters);
    let mut engine = options.engine.clone();
    if engine.initial_guess.is_none() {
        engine.initial_guess = problem.initial_guess(options.restarts, options.seed).map(|c| c.point);
    }
    let report = bnb::solve(&problem, problem.init_box(), &engine)?;
    let model = SwitchingModel::new(modes, data.dim(), report.best_point.clone())?;
    Ok(SwitchingSolution { model, report })
}
