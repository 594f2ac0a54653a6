//! Synthetic datasets with known ground truth.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{dot, Dataset};
use crate::error::{Error, Result};

/// Trajectories leaving `[-1e6, 1e6]` are regenerated with the next seed.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
const MAX_REGENERATIONS: u64 = 1000;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|_| Error::InvalidParameter(format!("invalid noise level {sigma}")))
}

fn uniform_vec(rng: &mut ChaCha8Rng, d: usize, half_width: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-half_width..=half_width)).collect()
}

/// Regressors closer to the origin than this are redrawn.
pub fn rejection_radius(d: usize) -> f64 {
    0.5 * (d as f64).sqrt()
}

/// Random switching regression data: `theta_j ~ U[-5, 5]^d`, regressors
/// uniform in `[-5, 5]^d` outside the ball of radius [`rejection_radius`],
/// uniform labels and Gaussian noise.
pub fn gen_switching(n: usize, d: usize, points: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    if n == 0 || d == 0 || points == 0 {
        return Err(Error::InvalidParameter("n, d and N must be at least 1".into()));
    }
    let mut rng = rng(seed);
    let noise = normal(sigma)?;
    let theta: Vec<Vec<f64>> = (0..n).map(|_| uniform_vec(&mut rng, d, 5.0)).collect();
    let rho = rejection_radius(d);
    let mut flat = Vec::with_capacity(points * d);
    let mut targets = Vec::with_capacity(points);
    let mut labels = Vec::with_capacity(points);
    for _ in 0..points {
        let x = loop {
            let x = uniform_vec(&mut rng, d, 5.0);
            if dot(&x, &x).sqrt() >= rho {
                break x;
            }
        };
        let q = rng.random_range(0..n);
        targets.push(dot(&theta[q], &x) + noise.sample(&mut rng));
        flat.extend_from_slice(&x);
        labels.push(q);
    }
    Dataset::from_flat(d, flat, targets)?.with_labels(labels, n)?.with_true_params(theta)
}

/// Parameters of the two-mode switched ARX benchmark, `x_i = [y_{i-1}, u_i]`.
pub fn vidal_params() -> Vec<Vec<f64>> {
    vec![vec![-0.9, 1.0], vec![0.7, -1.0]]
}

/// Parameters of the three-mode second-order switched ARX system,
/// `x_i = [y_{i-1}, y_{i-2}, u_i, u_{i-1}]`.
pub fn bako_params() -> Vec<Vec<f64>> {
    vec![
        vec![-0.4, 0.25, -0.15, 0.08],
        vec![1.55, -0.58, -2.1, 0.96],
        vec![1.0, -0.24, -0.65, 0.3],
    ]
}

/// Simulated switched ARX trajectory.
struct Trajectory {
    regressors: Vec<f64>,
    targets: Vec<f64>,
    labels: Vec<usize>,
    /// Noise-free part `theta_q . x_i` of each target.
    signal: Vec<f64>,
}

/// Simulates `y_i = theta_{q_i} . x_i + xi_i` where `x_i` stacks `na` past
/// outputs and `nb` standard normal inputs (`u_i` first). Returns `None` on
/// divergence.
fn simulate(
    theta: &[Vec<f64>],
    na: usize,
    nb: usize,
    points: usize,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Trajectory>> {
    let noise = normal(sigma)?;
    let n = theta.len();
    let warmup = na.max(nb.saturating_sub(1));
    let total = points + warmup;
    let input = Normal::new(0.0, 1.0).expect("valid parameters");
    let u: Vec<f64> = (0..total).map(|_| input.sample(rng)).collect();
    let q: Vec<usize> = (0..total).map(|_| rng.random_range(0..n)).collect();
    let xi: Vec<f64> = (0..total).map(|_| noise.sample(rng)).collect();
    let mut y = vec![0.0; total];
    let d = na + nb;
    let mut out = Trajectory {
        regressors: Vec::with_capacity(points * d),
        targets: Vec::with_capacity(points),
        labels: Vec::with_capacity(points),
        signal: Vec::with_capacity(points),
    };
    let mut x = vec![0.0; d];
    for t in warmup..total {
        for k in 0..na {
            x[k] = y[t - 1 - k];
        }
        for k in 0..nb {
            x[na + k] = u[t - k];
        }
        let s = dot(&theta[q[t]], &x);
        y[t] = s + xi[t];
        if !(y[t].abs() <= DIVERGENCE_LIMIT) {
            return Ok(None);
        }
        out.regressors.extend_from_slice(&x);
        out.targets.push(y[t]);
        out.labels.push(q[t]);
        out.signal.push(s);
    }
    Ok(Some(out))
}

fn simulate_with_retries(
    theta: &[Vec<f64>],
    na: usize,
    nb: usize,
    points: usize,
    sigma: f64,
    seed: u64,
) -> Result<Trajectory> {
    for attempt in 0..MAX_REGENERATIONS {
        let mut rng = rng(seed.wrapping_add(attempt));
        if let Some(t) = simulate(theta, na, nb, points, sigma, &mut rng)? {
            return Ok(t);
        }
    }
    Err(Error::InvalidParameter("switched system diverged on every regeneration".into()))
}

fn trajectory_dataset(t: Trajectory, d: usize, theta: Vec<Vec<f64>>) -> Result<Dataset> {
    let n = theta.len();
    Dataset::from_flat(d, t.regressors, t.targets)?.with_labels(t.labels, n)?.with_true_params(theta)
}

/// Two-mode switched ARX benchmark with uniform switching, inputs
/// `u_i ~ N(0, 1)` and noise of standard deviation `sigma`.
pub fn gen_vidal(points: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    if points < 2 {
        return Err(Error::InvalidParameter("N must be at least 2".into()));
    }
    let theta = vidal_params();
    let t = simulate_with_retries(&theta, 1, 1, points, sigma, seed)?;
    trajectory_dataset(t, 2, theta)
}

/// Same as [`gen_vidal`] with every point generated by `mode`.
pub fn gen_vidal_fixed_mode(points: usize, sigma: f64, mode: usize, seed: u64) -> Result<Dataset> {
    let all = vidal_params();
    let theta = vec![all.get(mode).cloned().ok_or_else(|| Error::InvalidParameter(format!("no mode {mode}")))?];
    let t = simulate_with_retries(&theta, 1, 1, points, sigma, seed)?;
    trajectory_dataset(t, 2, theta)
}

/// A stable second-order mode: real poles in `(-0.95, 0.95)` and input
/// gains in `[-2, 2]`.
fn random_stable_mode(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let p1: f64 = rng.random_range(-0.95..0.95);
    let p2: f64 = rng.random_range(-0.95..0.95);
    let b1: f64 = rng.random_range(-2.0..=2.0);
    let b2: f64 = rng.random_range(-2.0..=2.0);
    vec![p1 + p2, -p1 * p2, b1, b2]
}

/// Parameters of the `n`-mode system: the three fixed modes, plus random
/// stable modes drawn from `seed` for `n = 5`.
pub fn bako_system(n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let mut theta = bako_params();
    match n {
        3 => {}
        5 => {
            let mut rng = rng(seed ^ 0x5eed_b4c0);
            theta.push(random_stable_mode(&mut rng));
            theta.push(random_stable_mode(&mut rng));
        }
        _ => return Err(Error::InvalidParameter(format!("the switched ARX system has 3 or 5 modes, not {n}"))),
    }
    Ok(theta)
}

/// Switched ARX data of the `n`-mode system with the noise level set so
/// that the signal-to-noise ratio is about `snr_db`. Returns the dataset
/// and the noise standard deviation used.
pub fn gen_bako(n: usize, points: usize, snr_db: f64, seed: u64) -> Result<(Dataset, f64)> {
    if points < 3 {
        return Err(Error::InvalidParameter("N must be at least 3".into()));
    }
    let theta = bako_system(n, seed)?;
    // A noise-free run with the same inputs and switching calibrates sigma.
    let clean = simulate_with_retries(&theta, 2, 2, points, 0.0, seed)?;
    let sigma = (variance(&clean.signal) / 10f64.powf(snr_db / 10.0)).sqrt();
    let noisy = simulate_with_retries(&theta, 2, 2, points, sigma, seed)?;
    Ok((trajectory_dataset(noisy, 4, theta)?, sigma))
}

pub(crate) fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

/// Options of the robust-regression generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustSpec {
    pub d: usize,
    pub points: usize,
    /// Fraction of corrupted points.
    pub ratio: f64,
    pub sigma: f64,
    /// Outliers `|zeta|` instead of `zeta`.
    pub positive_only: bool,
    /// Last regressor component fixed to 1.
    pub affine: bool,
}

/// Linear data `y = theta . x + xi + zeta` with `theta ~ U[-5, 5]^d`,
/// `x ~ U[-5, 5]^d` and exactly `floor(ratio N)` gross errors
/// `zeta ~ N(100, 1000^2)`. The outlier mask is recorded and every point is
/// labelled with the single mode.
pub fn gen_robust(spec: &RobustSpec, seed: u64) -> Result<Dataset> {
    let RobustSpec { d, points, ratio, sigma, positive_only, affine } = *spec;
    if !(0.0..1.0).contains(&ratio) {
        return Err(Error::InvalidParameter(format!("outlier ratio must lie in [0, 1), got {ratio}")));
    }
    if d == 0 || points == 0 {
        return Err(Error::InvalidParameter("d and N must be at least 1".into()));
    }
    let mut rng = rng(seed);
    let noise = normal(sigma)?;
    let gross = Normal::new(100.0, 1000.0).expect("valid parameters");
    let theta = uniform_vec(&mut rng, d, 5.0);
    let outliers = (ratio * points as f64).floor() as usize;
    let mut mask: Vec<bool> = (0..points).map(|i| i < outliers).collect();
    mask.shuffle(&mut rng);
    let mut flat = Vec::with_capacity(points * d);
    let mut targets = Vec::with_capacity(points);
    for &corrupt in &mask {
        let mut x = uniform_vec(&mut rng, d, 5.0);
        if affine {
            x[d - 1] = 1.0;
        }
        let mut y = dot(&theta, &x) + noise.sample(&mut rng);
        if corrupt {
            let zeta: f64 = gross.sample(&mut rng);
            y += if positive_only { zeta.abs() } else { zeta };
        }
        flat.extend_from_slice(&x);
        targets.push(y);
    }
    Dataset::from_flat(d, flat, targets)?
        .with_labels(vec![0; points], 1)?
        .with_true_params(vec![theta])?
        .with_outlier_mask(mask)
}
