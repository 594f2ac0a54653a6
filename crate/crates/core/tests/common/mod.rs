//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the solvers under test.

#![allow(dead_code)]

use globreg::{BoxRegion, Dataset};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Least squares for d <= 2 by Cramer's rule. Groups too small to pin the
/// parameters down are interpolated exactly (sse 0, minimum-norm fit).
pub fn small_ls(data: &Dataset, idx: &[usize]) -> (Vec<f64>, f64) {
    let d = data.dim();
    assert!(d <= 2, "reference solver handles d <= 2 only");
    if idx.is_empty() {
        return (vec![0.0; d], 0.0);
    }
    let mut g = [[0.0; 2]; 2];
    let mut b = [0.0; 2];
    for &i in idx {
        let x = data.x(i);
        for a in 0..d {
            b[a] += x[a] * data.y(i);
            for c in 0..d {
                g[a][c] += x[a] * x[c];
            }
        }
    }
    let w = if d == 1 {
        vec![b[0] / g[0][0]]
    } else {
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if idx.len() < 2 || det.abs() <= 1e-12 * g[0][0] * g[1][1] {
            let x = data.x(idx[0]);
            let s = data.y(idx[0]) / (x[0] * x[0] + x[1] * x[1]);
            return (vec![s * x[0], s * x[1]], 0.0);
        }
        vec![(b[0] * g[1][1] - b[1] * g[0][1]) / det, (g[0][0] * b[1] - g[1][0] * b[0]) / det]
    };
    let sse: f64 = idx
        .iter()
        .map(|&i| {
            let e = data.y(i) - data.x(i).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            e * e
        })
        .sum();
    (w, sse.max(0.0))
}

/// Exhaustive two-mode optimum over all `2^N` assignments. Returns the cost,
/// the per-mode fits, and the group sizes of the best assignment.
pub fn brute_force_two_modes(data: &Dataset) -> (f64, [Vec<f64>; 2], [usize; 2]) {
    let n = data.len();
    assert!(n <= 20);
    let mut best = (f64::INFINITY, [Vec::new(), Vec::new()], [0, 0]);
    for mask in 0u32..(1 << n) {
        let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| mask & (1 << i) == 0);
        let (wa, sa) = small_ls(data, &a);
        let (wb, sb) = small_ls(data, &b);
        if sa + sb < best.0 {
            best = (sa + sb, [wa, wb], [a.len(), b.len()]);
        }
    }
    best
}

/// Largest number of points with `|y_i - w x_i| <= eps` over `w` in
/// `[-hw, hw]`, for d = 1, by scanning the interval endpoints.
pub fn max_fs_1d(data: &Dataset, eps: f64, hw: f64) -> usize {
    assert_eq!(data.dim(), 1);
    let mut always = 0;
    let mut intervals = Vec::new();
    for i in 0..data.len() {
        let (x, y) = (data.x(i)[0], data.y(i));
        if x == 0.0 {
            if y.abs() <= eps {
                always += 1;
            }
            continue;
        }
        let (a, b) = ((y - eps) / x, (y + eps) / x);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if hi >= -hw && lo <= hw {
            intervals.push((lo.max(-hw), hi.min(hw)));
        }
    }
    let mut candidates: Vec<f64> = intervals.iter().map(|iv| iv.0).collect();
    candidates.push(-hw);
    let best = candidates
        .iter()
        .map(|&w| intervals.iter().filter(|&&(lo, hi)| lo <= w && w <= hi).count())
        .max()
        .unwrap_or(0);
    best + always
}

/// Saturated squared cost, written out independently.
pub fn be2(data: &Dataset, w: &[f64], eps: f64) -> f64 {
    (0..data.len())
        .map(|i| {
            let e = data.y(i) - data.x(i).iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            (e * e).min(eps * eps)
        })
        .sum()
}

/// Minimum of the saturated squared cost on a uniform grid over `[-hw, hw]` (d = 1).
pub fn grid_min_be2(data: &Dataset, eps: f64, hw: f64, step: f64) -> (f64, f64) {
    let steps = (2.0 * hw / step).round() as usize;
    (0..=steps)
        .map(|k| {
            let w = -hw + k as f64 * step;
            (be2(data, &[w], eps), w)
        })
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
}

/// Switching cost, written out independently.
pub fn sw_cost(data: &Dataset, w: &[f64], modes: usize) -> f64 {
    let d = data.dim();
    (0..data.len())
        .map(|i| {
            (0..modes)
                .map(|j| {
                    let e = data.y(i) - data.x(i).iter().zip(&w[j * d..(j + 1) * d]).map(|(a, b)| a * b).sum::<f64>();
                    e * e
                })
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Box with center in `[-c, c]^dim` and side lengths log-uniform in `[min_w, max_w]`.
pub fn random_box(rng: &mut ChaCha8Rng, dim: usize, c: f64, min_w: f64, max_w: f64) -> BoxRegion {
    let mut lo = Vec::with_capacity(dim);
    let mut hi = Vec::with_capacity(dim);
    for _ in 0..dim {
        let center = rng.random_range(-c..=c);
        let width = (min_w.ln() + rng.random::<f64>() * (max_w.ln() - min_w.ln())).exp();
        lo.push(center - 0.5 * width);
        hi.push(center + 0.5 * width);
    }
    BoxRegion::new(lo, hi).unwrap()
}

pub fn sample_in_box(rng: &mut ChaCha8Rng, region: &BoxRegion) -> Vec<f64> {
    region.lower().iter().zip(region.upper()).map(|(l, u)| l + (u - l) * rng.random::<f64>()).collect()
}

/// Points on two random lines (or hyperplanes) with small noise.
pub fn random_dataset(rng: &mut ChaCha8Rng, d: usize, n_points: usize) -> Dataset {
    let lines: Vec<Vec<f64>> = (0..2).map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
    let mut flat = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..n_points {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let j = rng.random_range(0..2);
        let y = x.iter().zip(&lines[j]).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-0.3..0.3);
        flat.extend_from_slice(&x);
        ys.push(y);
    }
    Dataset::from_flat(d, flat, ys).unwrap()
}
