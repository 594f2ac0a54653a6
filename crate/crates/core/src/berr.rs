//! Bounded-error estimation with saturated losses.
//!
//! A single linear model `w` is scored on an active index set by either
//! `sum min(e_i^2, eps^2)` (p = 2) or the number of residuals with
//! `|e_i| > eps` (p = 0). Minimizing the latter is the maximum feasible
//! subsystem problem. Both are solved globally by branch-and-bound over
//! `R^d`, and [`decompose`] peels off one submodel at a time until every
//! point is explained.
//!
//! Over a box, each point is either surely inside the error tube, surely
//! outside it, or undecided ([`saturation_sets`]); the lower bounds charge
//! the three groups differently.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bnb::{self, Candidate, Problem, SolveOptions};
use crate::bounds::ResidualBracket;
use crate::dataset::{dot, Dataset};
use crate::error::{Error, Result};
use crate::lstsq::{box_ls_unchecked, ols};
use crate::region::BoxRegion;
use crate::report::SolveReport;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must be positive and finite, got {eps}")))
    }
}

fn check_inputs(w: &[f64], active: &[usize], data: &Dataset, eps: f64) -> Result<()> {
    check_eps(eps)?;
    if w.len() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), found: w.len() });
    }
    if let Some(&i) = active.iter().find(|&&i| i >= data.len()) {
        return Err(Error::InvalidParameter(format!("point index {i} out of range")));
    }
    Ok(())
}

/// `sum_{i in active} min(e_i^2, eps^2)`.
pub fn cost_be2(w: &[f64], active: &[usize], data: &Dataset, eps: f64) -> Result<f64> {
    check_inputs(w, active, data, eps)?;
    Ok(cost_be2_unchecked(w, active, data, eps))
}

pub(crate) fn cost_be2_unchecked(w: &[f64], active: &[usize], data: &Dataset, eps: f64) -> f64 {
    let cap = eps * eps;
    active
        .iter()
        .map(|&i| {
            let e = data.y(i) - dot(w, data.x(i));
            (e * e).min(cap)
        })
        .sum()
}

/// Number of active points with `|e_i| > eps`. Points on the boundary count
/// as inliers.
pub fn cost_be0(w: &[f64], active: &[usize], data: &Dataset, eps: f64) -> Result<usize> {
    check_inputs(w, active, data, eps)?;
    Ok(cost_be0_unchecked(w, active, data, eps))
}

pub(crate) fn cost_be0_unchecked(w: &[f64], active: &[usize], data: &Dataset, eps: f64) -> usize {
    active.iter().filter(|&&i| (data.y(i) - dot(w, data.x(i))).abs() > eps).count()
}

/// Active points within the tube `|e_i| <= eps`.
pub fn inliers(w: &[f64], active: &[usize], data: &Dataset, eps: f64) -> Vec<usize> {
    active.iter().copied().filter(|&i| (data.y(i) - dot(w, data.x(i))).abs() <= eps).collect()
}

/// Result of the descent heuristic.
#[derive(Debug, Clone)]
pub struct Descent {
    pub params: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    /// `cost_be2` of every iterate, starting with the initial point.
    pub costs: Vec<f64>,
}

/// Alternates between collecting the points inside the tube and refitting
/// them by least squares. Stops when the inlier set no longer changes, when
/// it becomes empty, or after `max_iter` refits.
///
/// Each refit can only lower `cost_be2`: the new model fits the previous
/// inliers at least as well and every other point is charged at most
/// `eps^2` anyway. This is checked at run time (up to rounding).
pub fn descent_heuristic(data: &Dataset, active: &[usize], eps: f64, init: &[f64], max_iter: usize) -> Result<Descent> {
    check_inputs(init, active, data, eps)?;
    let mut w = init.to_vec();
    let mut costs = vec![cost_be2_unchecked(&w, active, data, eps)];
    let mut tube = inliers(&w, active, data, eps);
    let mut iterations = 0;
    while iterations < max_iter && !tube.is_empty() {
        iterations += 1;
        w = ols(data, &tube)?.params;
        let cost = cost_be2_unchecked(&w, active, data, eps);
        let previous = *costs.last().expect("initial cost recorded");
        debug_assert!(
            cost <= previous + 1e-9 * (1.0 + previous),
            "descent step increased the cost from {previous} to {cost}"
        );
        costs.push(cost);
        let next = inliers(&w, active, data, eps);
        if next == tube {
            break;
        }
        tube = next;
    }
    let cost = *costs.last().expect("initial cost recorded");
    Ok(Descent { params: w, cost, iterations, costs })
}

/// Partition of the bracketed points by their position relative to the
/// error tube over a whole box.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SaturationSets {
    /// `max e_i^2 <= eps^2` over the box.
    pub inside: Vec<usize>,
    /// `min e_i^2 > eps^2` over the box.
    pub saturated: Vec<usize>,
    pub undecided: Vec<usize>,
}

impl SaturationSets {
    pub fn total(&self) -> usize {
        self.inside.len() + self.saturated.len() + self.undecided.len()
    }
}

/// Sorts the points of a single-mode bracket into [`SaturationSets`]
/// (dataset indexes). Also returns the saturated pointwise sum over the
/// undecided points, which the bounds reuse.
fn partition(brackets: &ResidualBracket, eps: f64) -> (SaturationSets, f64) {
    let cap = eps * eps;
    let mut sets = SaturationSets::default();
    let mut undecided_sum = 0.0;
    for k in 0..brackets.len() {
        let r = brackets.range(k, 0);
        let i = brackets.point(k);
        if r.max_sq() <= cap {
            sets.inside.push(i);
        } else {
            let low = r.min_sq();
            if low > cap {
                sets.saturated.push(i);
            } else {
                sets.undecided.push(i);
                undecided_sum += low;
            }
        }
    }
    (sets, undecided_sum)
}

fn check_single_mode(brackets: &ResidualBracket) -> Result<()> {
    if brackets.modes() != 1 {
        return Err(Error::InvalidParameter(format!("expected a single-mode bracket, got {} modes", brackets.modes())));
    }
    Ok(())
}

/// Saturation sets over the box the brackets were computed on.
pub fn saturation_sets(brackets: &ResidualBracket, eps: f64) -> Result<SaturationSets> {
    check_eps(eps)?;
    check_single_mode(brackets)?;
    Ok(partition(brackets, eps).0)
}

/// `sum_i min(min_{w in B} e_i(w)^2, eps^2)` over the bracketed points.
pub fn lower_be2_pointwise(brackets: &ResidualBracket, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    check_single_mode(brackets)?;
    Ok(pointwise_unchecked(brackets, eps))
}

fn pointwise_unchecked(brackets: &ResidualBracket, eps: f64) -> f64 {
    let cap = eps * eps;
    (0..brackets.len()).map(|k| brackets.min_sq(k, 0).min(cap)).sum()
}

/// Undecided points charged pointwise, saturated points `eps^2` each, and
/// the inside points a box-constrained least-squares fit (never less than
/// their pointwise sum).
pub fn lower_be2_sets(
    region: &BoxRegion,
    sets: &SaturationSets,
    data: &Dataset,
    eps: f64,
    brackets: &ResidualBracket,
) -> Result<f64> {
    check_eps(eps)?;
    check_single_mode(brackets)?;
    if region.dim() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), found: region.dim() });
    }
    let mut position = vec![usize::MAX; data.len()];
    for (k, &i) in brackets.points().iter().enumerate() {
        position[i] = k;
    }
    let lookup = |i: usize| -> Result<usize> {
        match position.get(i) {
            Some(&k) if k != usize::MAX => Ok(k),
            _ => Err(Error::InvalidParameter(format!("point {i} is not bracketed"))),
        }
    };
    let mut undecided_sum = 0.0;
    for &i in &sets.undecided {
        undecided_sum += brackets.min_sq(lookup(i)?, 0).min(eps * eps);
    }
    let mut inside_sum = 0.0;
    for &i in &sets.inside {
        inside_sum += brackets.min_sq(lookup(i)?, 0);
    }
    Ok(sets_bound(region, sets, data, eps, undecided_sum, inside_sum))
}

fn sets_bound(region: &BoxRegion, sets: &SaturationSets, data: &Dataset, eps: f64, undecided: f64, inside: f64) -> f64 {
    let fit = if sets.inside.is_empty() {
        0.0
    } else {
        box_ls_unchecked(data, &sets.inside, region.lower(), region.upper()).value
    };
    undecided + fit.max(inside) + sets.saturated.len() as f64 * eps * eps
}

/// `|I_2(B)|`: points outside the tube for every parameter in the box.
pub fn lower_be0(sets: &SaturationSets) -> usize {
    sets.saturated.len()
}

/// Saturated-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Saturation {
    /// `min(e^2, eps^2)`.
    Squared,
    /// `1[|e| > eps]`.
    Count,
}

impl Saturation {
    pub fn from_p(p: u32) -> Result<Self> {
        match p {
            0 => Ok(Self::Count),
            2 => Ok(Self::Squared),
            _ => Err(Error::InvalidParameter(format!("p must be 0 or 2, got {p}"))),
        }
    }

    pub fn p(self) -> u32 {
        match self {
            Self::Count => 0,
            Self::Squared => 2,
        }
    }
}

/// Single-model bounded-error estimation as a branch-and-bound problem over `R^d`.
pub struct BoundedError<'a> {
    data: &'a Dataset,
    active: Vec<usize>,
    eps: f64,
    loss: Saturation,
    init_box: BoxRegion,
    heuristic_iters: usize,
}

impl<'a> BoundedError<'a> {
    pub fn new(data: &'a Dataset, active: Vec<usize>, eps: f64, loss: Saturation, init_box: BoxRegion) -> Result<Self> {
        check_eps(eps)?;
        if init_box.dim() != data.dim() {
            return Err(Error::DimensionMismatch { expected: data.dim(), found: init_box.dim() });
        }
        if let Some(&i) = active.iter().find(|&&i| i >= data.len()) {
            return Err(Error::InvalidParameter(format!("point index {i} out of range")));
        }
        Ok(Self { data, active, eps, loss, init_box, heuristic_iters: 100 })
    }

    pub fn with_heuristic_iters(mut self, iters: usize) -> Self {
        self.heuristic_iters = iters;
        self
    }

    pub fn init_box(&self) -> &BoxRegion {
        &self.init_box
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    fn cost(&self, w: &[f64]) -> f64 {
        match self.loss {
            Saturation::Squared => cost_be2_unchecked(w, &self.active, self.data, self.eps),
            Saturation::Count => cost_be0_unchecked(w, &self.active, self.data, self.eps) as f64,
        }
    }

    /// Runs the descent heuristic from `start` and scores its output with
    /// this problem's loss. Outputs outside the initial box are discarded.
    pub fn heuristic_from(&self, start: &[f64]) -> Option<Candidate> {
        let run = descent_heuristic(self.data, &self.active, self.eps, start, self.heuristic_iters).ok()?;
        if !self.init_box.contains(&run.params) {
            return None;
        }
        let value = match self.loss {
            Saturation::Squared => run.cost,
            Saturation::Count => self.cost(&run.params),
        };
        Some(Candidate { value, point: run.params })
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
            if let Some(c) = self.heuristic_from(&start) {
                if best.as_ref().is_none_or(|b| c.value < b.value) {
                    best = Some(c);
                }
            }
        }
        best
    }
}

impl Problem for BoundedError<'_> {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn evaluate(&self, w: &[f64]) -> f64 {
        self.cost(w)
    }

    fn split(&self, region: &BoxRegion) -> Result<(BoxRegion, BoxRegion)> {
        region.split_longest()
    }

    fn upper(&self, region: &BoxRegion, refresh: bool) -> Candidate {
        let base = region.lower().to_vec();
        let mut best = Candidate { value: self.cost(&base), point: base };
        if refresh {
            if let Some(c) = self.heuristic_from(&region.center()) {
                if c.value < best.value {
                    best = c;
                }
            }
        }
        best
    }

    fn lower(&self, region: &BoxRegion, incumbent: f64) -> f64 {
        let brackets = ResidualBracket::compute_unchecked(self.data, region, 1, &self.active);
        match self.loss {
            Saturation::Count => {
                let cap = self.eps * self.eps;
                (0..brackets.len()).filter(|&k| brackets.min_sq(k, 0) > cap).count() as f64
            }
            Saturation::Squared => {
                let pointwise = pointwise_unchecked(&brackets, self.eps);
                if pointwise > bnb::prune_threshold(incumbent) || brackets.is_empty() {
                    return pointwise;
                }
                let (sets, undecided) = partition(&brackets, self.eps);
                let inside: f64 = {
                    // Pointwise minima of the inside points, read back by position.
                    let cap = self.eps * self.eps;
                    (0..brackets.len())
                        .map(|k| brackets.range(k, 0))
                        .filter(|r| r.max_sq() <= cap)
                        .map(|r| r.min_sq())
                        .sum()
                };
                sets_bound(region, &sets, self.data, self.eps, undecided, inside).max(pointwise)
            }
        }
    }

    fn integral(&self) -> bool {
        self.loss == Saturation::Count
    }
}

#[derive(Debug, Clone)]
pub struct BeOptions {
    /// Initial box; `[-10, 10]^d` when unset.
    pub init_box: Option<BoxRegion>,
    pub restarts: usize,
    pub heuristic_iters: usize,
    pub seed: u64,
    pub engine: SolveOptions,
}

impl Default for BeOptions {
    fn default() -> Self {
        Self { init_box: None, restarts: 100, heuristic_iters: 100, seed: 0, engine: SolveOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct BeSolution {
    pub params: Vec<f64>,
    pub report: SolveReport,
}

/// Globally minimizes the saturated loss of one linear model over `active`.
///
/// For the count loss the certified point is finally polished by the descent
/// heuristic, which is kept only if it does not increase the count.
pub fn solve_be(data: &Dataset, active: &[usize], eps: f64, loss: Saturation, options: &BeOptions) -> Result<BeSolution> {
    let init_box = match &options.init_box {
        Some(b) => b.clone(),
        None => BoxRegion::symmetric(data.dim(), 10.0)?,
    };
    let problem =
        BoundedError::new(data, active.to_vec(), eps, loss, init_box)?.with_heuristic_iters(options.heuristic_iters);
    let mut engine = options.engine.clone();
    if engine.initial_guess.is_none() {
        engine.initial_guess = problem.initial_guess(options.restarts, options.seed).map(|c| c.point);
    }
    let mut report = bnb::solve(&problem, problem.init_box(), &engine)?;
    if loss == Saturation::Count {
        // Every point of the optimal region has the same count; refit the
        // inliers so the returned model is a least-squares one.
        if let Some(c) = problem.heuristic_from(&report.best_point) {
            if c.value <= report.upper {
                report.upper = c.value;
                report.relative_gap = if c.value == 0.0 { 0.0 } else { ((c.value - report.lower) / c.value).max(0.0) };
                report.best_point = c.point;
            }
        }
    }
    Ok(BeSolution { params: report.best_point.clone(), report })
}

/// One submodel of a decomposition and the points it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Submodel {
    pub params: Vec<f64>,
    pub covered: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub submodels: Vec<Submodel>,
    /// Points no submodel explains; empty when the loop ran to completion.
    pub leftover: Vec<usize>,
    /// One certificate per solve, including a final solve that was rejected.
    pub reports: Vec<SolveReport>,
}

impl Decomposition {
    pub fn n_estimated(&self) -> usize {
        self.submodels.len()
    }

    pub fn params(&self) -> Vec<Vec<f64>> {
        self.submodels.iter().map(|s| s.params.clone()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct DecomposeOptions {
    /// A solve covering fewer points than this ends the loop, leaving the
    /// remaining points as leftover. The default of 1 only stops on a solve
    /// that covers nothing.
    pub min_support: usize,
    pub max_models: Option<usize>,
    pub solve: BeOptions,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self { min_support: 1, max_models: None, solve: BeOptions::default() }
    }
}

/// Greedy decomposition: fit one model globally to the points left, remove
/// the ones it explains within `eps`, repeat until nothing is left.
pub fn decompose(data: &Dataset, eps: f64, loss: Saturation, options: &DecomposeOptions) -> Result<Decomposition> {
    check_eps(eps)?;
    let mut active: Vec<usize> = (0..data.len()).collect();
    let mut out = Decomposition { submodels: Vec::new(), leftover: Vec::new(), reports: Vec::new() };
    let min_support = options.min_support.max(1);
    while !active.is_empty() {
        if options.max_models.is_some_and(|m| out.submodels.len() >= m) {
            break;
        }
        let mut solve = options.solve.clone();
        solve.seed = options.solve.seed.wrapping_add(out.submodels.len() as u64);
        let sol = solve_be(data, &active, eps, loss, &solve)?;
        out.reports.push(sol.report);
        let covered = inliers(&sol.params, &active, data, eps);
        if covered.len() < min_support {
            break;
        }
        active.retain(|i| covered.binary_search(i).is_err());
        out.submodels.push(Submodel { params: sol.params, covered });
    }
    out.leftover = active;
    Ok(out)
}
