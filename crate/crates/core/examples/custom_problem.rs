//! The branch-and-bound engine is generic: any cost with a box lower bound
//! can be minimized with a certificate. Here a one-dimensional
//! least-absolute-deviation fit, bounded with interval arithmetic.
//!
//! cargo run --release --example custom_problem

use globreg::bnb::{solve_with_progress, Candidate, Problem, SolveOptions};
use globreg::BoxRegion;

struct Lad {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Problem for Lad {
    fn dim(&self) -> usize {
        1
    }

    fn evaluate(&self, w: &[f64]) -> f64 {
        self.xs.iter().zip(&self.ys).map(|(x, y)| (y - w[0] * x).abs()).sum()
    }

    fn split(&self, region: &BoxRegion) -> globreg::Result<(BoxRegion, BoxRegion)> {
        region.split_longest()
    }

    fn upper(&self, region: &BoxRegion, _refresh: bool) -> Candidate {
        let point = region.center();
        Candidate { value: self.evaluate(&point), point }
    }

    fn lower(&self, region: &BoxRegion, _incumbent: f64) -> f64 {
        let (lo, hi) = (region.lower()[0], region.upper()[0]);
        self.xs
            .iter()
            .zip(&self.ys)
            .map(|(x, y)| {
                let (a, b) = (y - hi * x, y - lo * x);
                let (a, b) = (a.min(b), a.max(b));
                if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()) }
            })
            .sum()
    }
}

fn main() -> globreg::Result<()> {
    let xs: Vec<f64> = (1..=20).map(|i| i as f64 / 4.0).collect();
    let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| 0.7 * x + if i % 5 == 0 { 4.0 } else { 0.0 }).collect();
    let problem = Lad { xs, ys };
    let options = SolveOptions { tol: 1e-9, ..SolveOptions::default() };
    let report = solve_with_progress(&problem, &BoxRegion::symmetric(1, 10.0)?, &options, |p| {
        if p.iteration % 20 == 0 {
            println!("iteration {:>3}: {:.6} <= J* <= {:.6}, {} open boxes", p.iteration, p.lower, p.upper, p.active);
        }
    })?;
    println!("slope {:.6}, cost {:.6}, {:?}", report.best_point[0], report.upper, report.terminated_by);
    Ok(())
}
