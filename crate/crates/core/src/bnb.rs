//! Best-first branch-and-bound over boxes.
//!
//! The engine only knows about boxes and three callbacks supplied by a
//! [`Problem`]: splitting, upper bounding (a feasible point and its cost) and
//! lower bounding. Active boxes sit in a priority queue ordered by lower
//! bound, so the smallest queued bound is the global lower bound.
//!
//! Each iteration pops the box with the smallest lower bound, splits it,
//! upper-bounds both children (possibly improving the incumbent), then
//! lower-bounds them against the updated incumbent and queues the survivors.
//! A child's lower bound is never allowed to drop below its parent's.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::region::BoxRegion;
use crate::report::{SolveReport, Termination};

/// Relative slack applied before discarding a box.
pub const PRUNE_RELATIVE_MARGIN: f64 = 1e-12;
/// Absolute floor of the pruning slack.
pub const PRUNE_ABSOLUTE_MARGIN: f64 = 1e-15;

/// A feasible point together with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub value: f64,
    pub point: Vec<f64>,
}

/// Contract between the engine and a concrete optimization problem.
pub trait Problem: Sync {
    /// Dimension of the search space.
    fn dim(&self) -> usize;

    /// Cost at a point.
    fn evaluate(&self, w: &[f64]) -> f64;

    /// Splits a box in two. Children may come back empty (lower > upper on
    /// some side) when part of the box is infeasible; the engine drops them.
    fn split(&self, region: &BoxRegion) -> Result<(BoxRegion, BoxRegion)>;

    /// Upper bound over `region`: a feasible point of the initial box and its
    /// cost. `refresh` marks the iterations where a local heuristic should
    /// run in addition to the base-point evaluation.
    fn upper(&self, region: &BoxRegion, refresh: bool) -> Candidate;

    /// Lower bound on the cost over `region`. May return early with any
    /// valid bound once it exceeds `incumbent`.
    fn lower(&self, region: &BoxRegion, incumbent: f64) -> f64;

    /// Integer-valued costs stop as soon as `upper - lower < 1`.
    fn integral(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    pub absolute_gap: bool,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    pub initial_guess: Option<Vec<f64>>,
    /// Iterations between heuristic refreshes; 0 disables them.
    pub refresh_period: usize,
    /// Above 1, the two children of a split are bounded concurrently.
    pub workers: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            absolute_gap: false,
            node_limit: None,
            time_limit: None,
            initial_guess: None,
            refresh_period: 100,
            workers: 1,
        }
    }
}

/// Snapshot passed to progress callbacks once per iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub iteration: usize,
    pub upper: f64,
    pub lower: f64,
    pub active: usize,
}

struct Node {
    lower: f64,
    seq: u64,
    region: BoxRegion,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: reverse so the smallest bound, then the
    // oldest node, comes out first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower.total_cmp(&self.lower).then_with(|| other.seq.cmp(&self.seq))
    }
}

#[inline]
pub(crate) fn prune_threshold(incumbent: f64) -> f64 {
    incumbent + (incumbent.abs() * PRUNE_RELATIVE_MARGIN).max(PRUNE_ABSOLUTE_MARGIN)
}

struct Incumbent {
    value: f64,
    point: Vec<f64>,
}

impl Incumbent {
    fn offer(&mut self, c: Candidate) {
        if c.value < self.value {
            self.value = c.value;
            self.point = c.point;
        }
    }
}

fn relative_gap(upper: f64, lower: f64) -> f64 {
    if upper == 0.0 {
        0.0
    } else if upper.is_finite() {
        ((upper - lower) / upper).max(0.0)
    } else {
        f64::INFINITY
    }
}

pub fn solve<P: Problem>(problem: &P, init: &BoxRegion, options: &SolveOptions) -> Result<SolveReport> {
    solve_with_progress(problem, init, options, |_| {})
}

pub fn solve_with_progress<P, F>(
    problem: &P,
    init: &BoxRegion,
    options: &SolveOptions,
    mut progress: F,
) -> Result<SolveReport>
where
    P: Problem,
    F: FnMut(&Progress),
{
    if !(options.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", options.tol)));
    }
    if init.dim() != problem.dim() {
        return Err(Error::DimensionMismatch { expected: problem.dim(), found: init.dim() });
    }
    if init.is_empty() {
        return Err(Error::InvalidBox("initial box is empty".into()));
    }
    let start = Instant::now();
    let mut incumbent = Incumbent { value: f64::INFINITY, point: init.lower().to_vec() };
    if let Some(guess) = &options.initial_guess {
        if !init.contains(guess) {
            return Err(Error::InvalidParameter("initial guess lies outside the initial box".into()));
        }
        incumbent.offer(Candidate { value: problem.evaluate(guess), point: guess.clone() });
    }

    let mut explored = 1;
    let mut pruned = 0;
    let mut seq = 0u64;
    let mut queue = BinaryHeap::new();

    incumbent.offer(problem.upper(init, false));
    let root_lower = problem.lower(init, incumbent.value).max(0.0);
    if root_lower <= prune_threshold(incumbent.value) {
        queue.push(Node { lower: root_lower, seq, region: init.clone() });
        seq += 1;
    } else {
        pruned += 1;
    }

    let mut global_lower = 0.0f64;
    // The root evaluation counts as the first iteration.
    let mut iterations = 1;
    let integral = problem.integral();

    let terminated_by = loop {
        let Some(top) = queue.peek() else {
            // Everything was pruned: the incumbent is optimal up to the margin.
            break Termination::GapTolerance;
        };
        global_lower = global_lower.max(top.lower.min(incumbent.value));
        let gap = incumbent.value - global_lower;
        if integral && gap < 1.0 {
            break Termination::IntegerGap;
        }
        if options.absolute_gap || incumbent.value == 0.0 {
            if gap <= options.tol {
                break Termination::AbsoluteGap;
            }
        } else if relative_gap(incumbent.value, global_lower) <= options.tol {
            break Termination::GapTolerance;
        }
        if options.node_limit.is_some_and(|limit| iterations >= limit) {
            break Termination::NodeLimit;
        }
        if options.time_limit.is_some_and(|limit| start.elapsed() >= limit) {
            break Termination::TimeLimit;
        }

        let node = queue.pop().expect("peeked");
        iterations += 1;
        if node.lower > prune_threshold(incumbent.value) {
            pruned += 1;
            continue;
        }
        let (first, second) = match problem.split(&node.region) {
            Ok(pair) => pair,
            Err(Error::ZeroVolume) => {
                // A single point: its exact cost was already offered as an upper bound.
                pruned += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let refresh = options.refresh_period > 0 && iterations % options.refresh_period == 0;
        let children: Vec<BoxRegion> = [first, second].into_iter().filter(|b| !b.is_empty()).collect();
        pruned += 2 - children.len();
        explored += children.len();

        let uppers: Vec<Candidate> = map_children(&children, options.workers, |b| problem.upper(b, refresh));
        for c in uppers {
            incumbent.offer(c);
        }
        let threshold_value = incumbent.value;
        let lowers: Vec<f64> = map_children(&children, options.workers, |b| problem.lower(b, threshold_value));
        for (region, lower) in children.into_iter().zip(lowers) {
            let lower = lower.max(node.lower);
            if lower <= prune_threshold(incumbent.value) {
                queue.push(Node { lower, seq, region });
                seq += 1;
            } else {
                pruned += 1;
            }
        }
        progress(&Progress {
            iteration: iterations,
            upper: incumbent.value,
            lower: global_lower,
            active: queue.len(),
        });
    };

    if queue.is_empty() && incumbent.value.is_finite() {
        global_lower = incumbent.value;
    }
    let lower = global_lower.min(incumbent.value);
    Ok(SolveReport {
        best_point: incumbent.point,
        upper: incumbent.value,
        lower,
        relative_gap: relative_gap(incumbent.value, lower),
        iterations,
        boxes_explored: explored,
        boxes_pruned: pruned,
        wall_time: start.elapsed().as_secs_f64(),
        terminated_by,
    })
}

fn map_children<T: Send, F>(children: &[BoxRegion], workers: usize, f: F) -> Vec<T>
where
    F: Fn(&BoxRegion) -> T + Sync,
{
    if workers > 1 && children.len() == 2 {
        let (a, b) = rayon::join(|| f(&children[0]), || f(&children[1]));
        vec![a, b]
    } else {
        children.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `J(w) = (w - 0.3)^2 + offset` on an interval, with an exact lower bound.
    struct Parabola {
        offset: f64,
        exact: bool,
    }

    impl Problem for Parabola {
        fn dim(&self) -> usize {
            1
        }
        fn evaluate(&self, w: &[f64]) -> f64 {
            (w[0] - 0.3).powi(2) + self.offset
        }
        fn split(&self, region: &BoxRegion) -> Result<(BoxRegion, BoxRegion)> {
            region.split_longest()
        }
        fn upper(&self, region: &BoxRegion, _refresh: bool) -> Candidate {
            let w = if self.exact {
                vec![0.3f64.clamp(region.lower()[0], region.upper()[0])]
            } else {
                region.lower().to_vec()
            };
            Candidate { value: self.evaluate(&w), point: w }
        }
        fn lower(&self, region: &BoxRegion, _incumbent: f64) -> f64 {
            let w = 0.3f64.clamp(region.lower()[0], region.upper()[0]);
            self.evaluate(&[w])
        }
    }

    #[test]
    fn exact_bounds_stop_immediately() {
        let p = Parabola { offset: 1.0, exact: true };
        let r = solve(&p, &BoxRegion::symmetric(1, 10.0).unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.relative_gap, 0.0);
        assert_eq!(r.terminated_by, Termination::GapTolerance);
        assert_eq!(r.best_point, vec![0.3]);
    }

    #[test]
    fn base_point_upper_bounds_converge() {
        let p = Parabola { offset: 1.0, exact: false };
        let r = solve(&p, &BoxRegion::symmetric(1, 10.0).unwrap(), &SolveOptions::default()).unwrap();
        assert!(r.terminated_by.is_certified());
        assert!(r.relative_gap <= 1e-3);
        assert!(r.lower <= 1.0 + 1e-12 && r.upper >= 1.0);
        assert!(r.upper - 1.0 <= 1e-3 * r.upper);
    }

    #[test]
    fn zero_optimum_switches_to_absolute_gap() {
        let p = Parabola { offset: 0.0, exact: false };
        let opts = SolveOptions { tol: 1e-8, ..Default::default() };
        let r = solve(&p, &BoxRegion::symmetric(1, 10.0).unwrap(), &opts).unwrap();
        assert!(r.terminated_by.is_certified());
        assert!(r.upper - r.lower <= 1e-8);
    }

    #[test]
    fn warm_start_with_optimum() {
        let p = Parabola { offset: 2.0, exact: false };
        let opts = SolveOptions { initial_guess: Some(vec![0.3]), ..Default::default() };
        let r = solve(&p, &BoxRegion::symmetric(1, 10.0).unwrap(), &opts).unwrap();
        assert_eq!(r.best_point, vec![0.3]);
        assert_eq!(r.upper, 2.0);
    }

    #[test]
    fn node_limit_reports_valid_bounds() {
        let p = Parabola { offset: 1.0, exact: false };
        let opts = SolveOptions { tol: 1e-14, node_limit: Some(5), ..Default::default() };
        let r = solve(&p, &BoxRegion::symmetric(1, 10.0).unwrap(), &opts).unwrap();
        assert_eq!(r.terminated_by, Termination::NodeLimit);
        assert_eq!(r.iterations, 5);
        assert!(r.lower <= 1.0 && r.upper >= 1.0);
    }

    #[test]
    fn rejects_bad_options() {
        let p = Parabola { offset: 1.0, exact: false };
        let b = BoxRegion::symmetric(1, 1.0).unwrap();
        assert!(solve(&p, &b, &SolveOptions { tol: 0.0, ..Default::default() }).is_err());
        let outside = SolveOptions { initial_guess: Some(vec![3.0]), ..Default::default() };
        assert!(solve(&p, &b, &outside).is_err());
        assert!(solve(&p, &BoxRegion::symmetric(2, 1.0).unwrap(), &SolveOptions::default()).is_err());
    }

    #[test]
    fn progress_is_monotone() {
        let p = Parabola { offset: 0.5, exact: false };
        let mut trace = Vec::new();
        solve_with_progress(
            &p,
            &BoxRegion::symmetric(1, 10.0).unwrap(),
            &SolveOptions { tol: 1e-9, ..Default::default() },
            |s| trace.push(*s),
        )
        .unwrap();
        assert!(!trace.is_empty());
        for w in trace.windows(2) {
            assert!(w[1].upper <= w[0].upper);
            assert!(w[1].lower >= w[0].lower);
        }
    }
}
