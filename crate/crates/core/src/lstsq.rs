//! Ordinary and box-constrained least squares over subsets of a dataset.
//!
//! Both solvers work on the `d x d` normal equations, which is what the
//! branch-and-bound needs: `d` is small while the subsets can hold thousands
//! of points. Singular systems are solved in the minimum-norm sense through a
//! symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dataset::{dot, Dataset};
use crate::error::{Error, Result};

/// Unconstrained fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub params: Vec<f64>,
    pub sse: f64,
}

/// Box-constrained fit.
///
/// `value` is always a lower bound on the constrained minimum. With
/// `certified` set, `params` is a feasible KKT point and `value` matches its
/// objective up to rounding; otherwise the active-set iteration gave up and
/// `value` comes from the unconstrained optimum and a first-order bound at
/// the last feasible iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxLeastSquares {
    pub params: Vec<f64>,
    pub value: f64,
    pub certified: bool,
}

struct NormalEquations {
    gram: DMatrix<f64>,
    xty: DVector<f64>,
}

impl NormalEquations {
    fn accumulate(data: &Dataset, indices: &[usize]) -> Self {
        let d = data.dim();
        let mut gram = DMatrix::zeros(d, d);
        let mut xty = DVector::zeros(d);
        for &i in indices {
            let x = data.x(i);
            let y = data.y(i);
            for a in 0..d {
                xty[a] += x[a] * y;
                for b in a..d {
                    gram[(a, b)] += x[a] * x[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)];
            }
        }
        Self { gram, xty }
    }
}

/// Minimum-norm solution of `g z = rhs` for symmetric positive semidefinite `g`,
/// with one step of iterative refinement.
fn solve_psd(g: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let n = g.nrows();
    if n == 1 {
        let a = g[(0, 0)];
        return if a > 0.0 { DVector::from_element(1, rhs[0] / a) } else { DVector::zeros(1) };
    }
    let eig = SymmetricEigen::new(g.clone());
    let max_eig = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cutoff = max_eig * 1e-12 * n as f64;
    let apply = |v: &DVector<f64>| -> DVector<f64> {
        let proj = eig.eigenvectors.transpose() * v;
        let scaled = DVector::from_iterator(
            n,
            proj.iter()
                .zip(eig.eigenvalues.iter())
                .map(|(p, &l)| if l > cutoff { p / l } else { 0.0 }),
        );
        &eig.eigenvectors * scaled
    };
    let mut z = apply(rhs);
    let resid = rhs - g * &z;
    z += apply(&resid);
    z
}

fn sse(data: &Dataset, indices: &[usize], w: &[f64]) -> f64 {
    indices
        .iter()
        .map(|&i| {
            let e = data.y(i) - dot(data.x(i), w);
            e * e
        })
        .sum()
}

fn check_indices(data: &Dataset, indices: &[usize]) -> Result<()> {
    if indices.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= data.len()) {
        return Err(Error::InvalidParameter(format!("point index {i} out of range")));
    }
    Ok(())
}

/// Least-squares fit of `y ~ w . x` over the points in `indices`.
pub fn ols(data: &Dataset, indices: &[usize]) -> Result<LeastSquares> {
    check_indices(data, indices)?;
    let ne = NormalEquations::accumulate(data, indices);
    Ok(ols_from(data, indices, &ne))
}

fn ols_from(data: &Dataset, indices: &[usize], ne: &NormalEquations) -> LeastSquares {
    let w = solve_psd(&ne.gram, &ne.xty);
    let params: Vec<f64> = w.iter().copied().collect();
    let sse = sse(data, indices, &params);
    LeastSquares { params, sse }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Free,
    Lower,
    Upper,
}

/// Bounded-variable least squares: minimizes `sum (y_i - w . x_i)^2` over
/// `lower <= w <= upper` with a primal active-set method.
pub fn box_ls(data: &Dataset, indices: &[usize], lower: &[f64], upper: &[f64]) -> Result<BoxLeastSquares> {
    check_indices(data, indices)?;
    let d = data.dim();
    for bound in [lower, upper] {
        if bound.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: bound.len() });
        }
    }
    if (0..d).any(|k| !(lower[k] <= upper[k])) {
        return Err(Error::InvalidBox("lower bound exceeds upper bound".into()));
    }
    Ok(box_ls_unchecked(data, indices, lower, upper))
}

pub(crate) fn box_ls_unchecked(data: &Dataset, indices: &[usize], lower: &[f64], upper: &[f64]) -> BoxLeastSquares {
    let d = data.dim();
    let ne = NormalEquations::accumulate(data, indices);
    let unconstrained = ols_from(data, indices, &ne);
    if (0..d).all(|k| lower[k] <= unconstrained.params[k] && unconstrained.params[k] <= upper[k]) {
        return BoxLeastSquares { params: unconstrained.params, value: unconstrained.sse, certified: true };
    }

    let g = &ne.gram;
    let c = &ne.xty;
    let scale = (0..d).map(|k| g[(k, k)]).fold(0.0f64, f64::max)
        * (0..d).map(|k| lower[k].abs().max(upper[k].abs())).fold(1.0f64, f64::max)
        + c.amax();
    let grad_tol = 1e-10 * scale.max(f64::MIN_POSITIVE);

    let mut side = vec![Side::Free; d];
    let mut w = vec![0.0; d];
    let fixed: Vec<bool> = (0..d).map(|k| lower[k] == upper[k]).collect();
    for k in 0..d {
        if fixed[k] {
            side[k] = Side::Lower;
            w[k] = lower[k];
        } else {
            w[k] = 0.5 * (lower[k] + upper[k]);
        }
    }

    let cap = 10 * d;
    let mut steps = 0;
    let certified = 'outer: loop {
        // Solve over the free variables, walking back to feasibility when the
        // subproblem optimum leaves the box.
        loop {
            steps += 1;
            if steps > cap {
                break 'outer false;
            }
            let free: Vec<usize> = (0..d).filter(|&k| side[k] == Side::Free).collect();
            if free.is_empty() {
                break;
            }
            let nf = free.len();
            let mut sub = DMatrix::zeros(nf, nf);
            let mut rhs = DVector::zeros(nf);
            for (a, &ka) in free.iter().enumerate() {
                rhs[a] = c[ka];
                for k in 0..d {
                    if side[k] != Side::Free {
                        rhs[a] -= g[(ka, k)] * w[k];
                    }
                }
                for (b, &kb) in free.iter().enumerate() {
                    sub[(a, b)] = g[(ka, kb)];
                }
            }
            let z = solve_psd(&sub, &rhs);

            let mut alpha = 1.0;
            let mut blocking = None;
            for (a, &k) in free.iter().enumerate() {
                let step = z[a] - w[k];
                let t = if z[a] < lower[k] && step < 0.0 {
                    (lower[k] - w[k]) / step
                } else if z[a] > upper[k] && step > 0.0 {
                    (upper[k] - w[k]) / step
                } else {
                    continue;
                };
                if t < alpha {
                    alpha = t.max(0.0);
                    blocking = Some(k);
                }
            }
            match blocking {
                None => {
                    for (a, &k) in free.iter().enumerate() {
                        w[k] = z[a].clamp(lower[k], upper[k]);
                    }
                    break;
                }
                Some(kb) => {
                    for (a, &k) in free.iter().enumerate() {
                        w[k] = (w[k] + alpha * (z[a] - w[k])).clamp(lower[k], upper[k]);
                    }
                    if z[free.iter().position(|&k| k == kb).unwrap()] < lower[kb] {
                        w[kb] = lower[kb];
                        side[kb] = Side::Lower;
                    } else {
                        w[kb] = upper[kb];
                        side[kb] = Side::Upper;
                    }
                }
            }
        }

        // Multiplier signs of the bound variables.
        let gw = g * DVector::from_column_slice(&w) - c;
        let mut worst: Option<(usize, f64)> = None;
        for k in 0..d {
            if fixed[k] {
                continue;
            }
            let violation = match side[k] {
                Side::Lower => -gw[k],
                Side::Upper => gw[k],
                Side::Free => continue,
            };
            if violation > grad_tol && worst.is_none_or(|(_, v)| violation > v) {
                worst = Some((k, violation));
            }
        }
        match worst {
            None => break true,
            Some((k, _)) => side[k] = Side::Free,
        }
    };

    // First-order bound at the feasible iterate: the objective is convex, so
    // S(a) >= S(w) + grad . (a - w) for every a, minimized over the box.
    let objective = sse(data, indices, &w);
    let grad = (g * DVector::from_column_slice(&w) - c) * 2.0;
    let linear: f64 = (0..d)
        .map(|k| (grad[k] * (lower[k] - w[k])).min(grad[k] * (upper[k] - w[k])))
        .sum();
    let value = (objective + linear).max(unconstrained.sse).max(0.0);
    BoxLeastSquares { params: w, value, certified }
}
