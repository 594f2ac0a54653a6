//! Seeded experiment runner.
//!
//! A run draws one dataset per trial, solves it with every requested loss,
//! scores the estimates against the ground truth and the oracle, and
//! aggregates the trials as mean and standard deviation. Result files hold
//! no timing information, so that reruns with the same seed are
//! byte-identical; wall times go to a separate timing file.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::bench::generate::{gen_bako, gen_robust, gen_switching, gen_vidal, RobustSpec};
use crate::bench::metrics::{classification_error, exact_recovery, nmse, oracle};
use crate::berr::{decompose, solve_be, BeOptions, DecomposeOptions, Saturation};
use crate::bnb::SolveOptions;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::SwitchingModel;
use crate::region::BoxRegion;
use crate::report::SolveReport;
use crate::swreg::{solve_switching, SwitchingOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    SwitchingRandom,
    VidalBenchmark,
    BakoSystem,
    RobustOutliers,
    ExactRecovery,
}

impl Family {
    pub const ALL: [Family; 5] =
        [Self::SwitchingRandom, Self::VidalBenchmark, Self::BakoSystem, Self::RobustOutliers, Self::ExactRecovery];

    pub fn name(self) -> &'static str {
        match self {
            Self::SwitchingRandom => "switching-random",
            Self::VidalBenchmark => "vidal-benchmark",
            Self::BakoSystem => "bako-system",
            Self::RobustOutliers => "robust-outliers",
            Self::ExactRecovery => "exact-recovery",
        }
    }

    /// Families fitted with the saturated losses rather than switching regression.
    pub fn is_bounded_error(self) -> bool {
        matches!(self, Self::BakoSystem | Self::RobustOutliers | Self::ExactRecovery)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub family: Family,
    /// Number of modes (switching families and the switched ARX system).
    pub n: usize,
    pub d: usize,
    #[serde(rename = "N")]
    pub points: usize,
    pub sigma: f64,
    /// Outlier ratio for the robust families.
    pub ratio: f64,
    /// Overrides the family's tube half-width rule.
    pub eps: Option<f64>,
    /// Saturated loss exponent; both 0 and 2 when unset.
    pub p: Option<u32>,
    /// Affine model with positive outliers (robust families).
    pub affine: bool,
    pub snr_db: f64,
    pub tol: f64,
    pub box_halfwidth: f64,
    pub seed: u64,
    pub trials: usize,
    pub restarts: usize,
    /// Minimum number of points a decomposition submodel must explain.
    pub min_support: Option<usize>,
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    /// Trials solved concurrently.
    #[serde(skip)]
    pub workers: usize,
}

impl ExperimentConfig {
    /// Defaults of each family.
    pub fn new(family: Family) -> Self {
        let base = Self {
            family,
            n: 2,
            d: 2,
            points: 1000,
            sigma: 0.1,
            ratio: 0.0,
            eps: None,
            p: None,
            affine: false,
            snr_db: 30.0,
            tol: 1e-3,
            box_halfwidth: 10.0,
            seed: 0,
            trials: 10,
            restarts: 100,
            min_support: None,
            time_limit: None,
            node_limit: None,
            workers: 1,
        };
        match family {
            Family::SwitchingRandom => base,
            Family::VidalBenchmark => Self { sigma: 0.2, trials: 20, ..base },
            Family::BakoSystem => Self { n: 3, d: 4, points: 300, trials: 5, ..base },
            Family::RobustOutliers => Self { n: 1, d: 4, points: 500, ratio: 0.6, ..base },
            Family::ExactRecovery => Self { n: 1, d: 4, points: 500, ratio: 0.9, sigma: 0.0, ..base },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("at least one trial is required".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.box_halfwidth > 0.0) {
            return Err(Error::InvalidParameter("box half-width must be positive".into()));
        }
        if self.eps.is_some_and(|e| !(e > 0.0)) {
            return Err(Error::InvalidParameter("eps must be positive".into()));
        }
        if let Some(p) = self.p {
            Saturation::from_p(p)?;
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::InvalidParameter("sigma must be nonnegative".into()));
        }
        match self.family {
            Family::SwitchingRandom if self.n == 0 || self.d == 0 || self.points == 0 => {
                Err(Error::InvalidParameter("n, d and N must be at least 1".into()))
            }
            Family::BakoSystem if self.n != 3 && self.n != 5 => {
                Err(Error::InvalidParameter("the switched ARX system has 3 or 5 modes".into()))
            }
            Family::RobustOutliers | Family::ExactRecovery if !(0.0..1.0).contains(&self.ratio) => {
                Err(Error::InvalidParameter("outlier ratio must lie in [0, 1)".into()))
            }
            _ => Ok(()),
        }
    }

    fn engine(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            node_limit: self.node_limit,
            ..SolveOptions::default()
        }
    }

    fn losses(&self) -> Vec<Saturation> {
        match self.p {
            Some(p) => vec![Saturation::from_p(p).expect("validated")],
            None => vec![Saturation::Count, Saturation::Squared],
        }
    }

    /// Default decomposition support: 5% of the points, and never fewer than
    /// `d + 1` (any `d` points can be interpolated exactly).
    pub fn default_min_support(&self) -> usize {
        ((self.points as f64 * 0.05).ceil() as usize).max(self.d + 1)
    }

    fn trial_seed(&self, trial: usize) -> u64 {
        splitmix(self.seed ^ splitmix(trial as u64 + 1))
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Outcome of one trial for one loss.
#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    /// `sw` for switching regression, `l0` or `l2` for the saturated losses.
    pub loss: String,
    pub nmse: f64,
    pub ce: f64,
    pub recovered: bool,
    pub oracle_nmse: f64,
    pub oracle_ce: f64,
    pub n_estimated: usize,
    /// Every solve of the trial stopped on a gap criterion.
    pub certified: bool,
    pub solves: usize,
    pub iterations: usize,
    pub boxes_explored: usize,
    /// Largest relative gap over the trial's solves.
    pub relative_gap: f64,
    pub error: Option<String>,
    #[serde(skip)]
    pub solve_reports: Vec<SolveReport>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl TrialResult {
    fn failed(trial: usize, seed: u64, loss: &str, error: &Error, wall_time: f64) -> Self {
        Self {
            trial,
            seed,
            loss: loss.into(),
            nmse: f64::NAN,
            ce: f64::NAN,
            recovered: false,
            oracle_nmse: f64::NAN,
            oracle_ce: f64::NAN,
            n_estimated: 0,
            certified: false,
            solves: 0,
            iterations: 0,
            boxes_explored: 0,
            relative_gap: f64::NAN,
            error: Some(error.to_string()),
            solve_reports: Vec::new(),
            wall_time,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.error.is_some()
    }
}

/// Mean and standard deviation over the trials of one loss. Failed trials
/// are excluded from the statistics and counted separately.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub loss: String,
    pub trials: usize,
    pub failures: usize,
    pub certified: usize,
    pub nmse_mean: f64,
    pub nmse_std: f64,
    pub ce_mean: f64,
    pub ce_std: f64,
    pub oracle_nmse_mean: f64,
    pub oracle_nmse_std: f64,
    pub recovery_rate: f64,
    pub n_estimated_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub trial: usize,
    pub loss: String,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub aggregates: Vec<Aggregate>,
}

/// Output encoding of result files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::InvalidParameter(format!("unknown format `{s}`"))),
        }
    }
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn aggregate(loss: &str, rows: &[&TrialResult]) -> Aggregate {
    let ok: Vec<&&TrialResult> = rows.iter().filter(|r| !r.is_failure()).collect();
    let (nmse_mean, nmse_std) = mean_std(ok.iter().map(|r| r.nmse));
    let (ce_mean, ce_std) = mean_std(ok.iter().map(|r| r.ce));
    let (oracle_nmse_mean, oracle_nmse_std) = mean_std(ok.iter().map(|r| r.oracle_nmse));
    let (n_estimated_mean, _) = mean_std(ok.iter().map(|r| r.n_estimated as f64));
    Aggregate {
        loss: loss.into(),
        trials: rows.len(),
        failures: rows.len() - ok.len(),
        certified: ok.iter().filter(|r| r.certified).count(),
        nmse_mean,
        nmse_std,
        ce_mean,
        ce_std,
        oracle_nmse_mean,
        oracle_nmse_std,
        recovery_rate: ok.iter().filter(|r| r.recovered).count() as f64 / rows.len() as f64,
        n_estimated_mean,
    }
}

fn loss_tag(loss: Saturation) -> &'static str {
    match loss {
        Saturation::Count => "l0",
        Saturation::Squared => "l2",
    }
}

/// Scores that do not depend on the solver.
struct Reference {
    nmse: f64,
    ce: f64,
}

struct Estimate {
    params: Vec<Vec<f64>>,
    reports: Vec<SolveReport>,
}

fn fill(
    trial: usize,
    seed: u64,
    loss: &str,
    data: &Dataset,
    reference: &Reference,
    estimate: Estimate,
    wall_time: f64,
) -> Result<TrialResult> {
    let truth = data.true_params().ok_or(Error::MissingGroundTruth("true parameters"))?;
    let nmse_value = nmse(&estimate.params, truth)?;
    let ce = if estimate.params.is_empty() {
        1.0
    } else {
        classification_error(&SwitchingModel::from_modes(&estimate.params)?, data)?
    };
    let recovered = truth.len() == 1 && estimate.params.first().is_some_and(|w| exact_recovery(w, &truth[0]));
    let reports = estimate.reports;
    Ok(TrialResult {
        trial,
        seed,
        loss: loss.into(),
        nmse: nmse_value,
        ce,
        recovered,
        oracle_nmse: reference.nmse,
        oracle_ce: reference.ce,
        n_estimated: estimate.params.len(),
        certified: !reports.is_empty() && reports.iter().all(|r| r.terminated_by.is_certified()),
        solves: reports.len(),
        iterations: reports.iter().map(|r| r.iterations).sum(),
        boxes_explored: reports.iter().map(|r| r.boxes_explored).sum(),
        relative_gap: reports.iter().map(|r| r.relative_gap).fold(0.0, f64::max),
        error: None,
        solve_reports: reports,
        wall_time,
    })
}

fn generate(config: &ExperimentConfig, seed: u64) -> Result<(Dataset, f64)> {
    match config.family {
        Family::SwitchingRandom => Ok((gen_switching(config.n, config.d, config.points, config.sigma, seed)?, 0.0)),
        Family::VidalBenchmark => Ok((gen_vidal(config.points, config.sigma, seed)?, 0.0)),
        Family::BakoSystem => {
            let (data, sigma) = gen_bako(config.n, config.points, config.snr_db, seed)?;
            Ok((data, config.eps.unwrap_or(1.5 * sigma)))
        }
        Family::RobustOutliers | Family::ExactRecovery => {
            let exact = config.family == Family::ExactRecovery;
            let spec = RobustSpec {
                d: config.d,
                points: config.points,
                ratio: config.ratio,
                sigma: if exact { 0.0 } else { config.sigma },
                positive_only: config.affine,
                affine: config.affine,
            };
            let rule = if exact { 1e-6 } else { 1.5 * config.sigma };
            Ok((gen_robust(&spec, seed)?, config.eps.unwrap_or(rule)))
        }
    }
}

fn run_trial(config: &ExperimentConfig, trial: usize) -> Vec<TrialResult> {
    let seed = config.trial_seed(trial);
    let tags: Vec<&str> = if config.family.is_bounded_error() {
        config.losses().into_iter().map(loss_tag).collect()
    } else {
        vec!["sw"]
    };
    let (data, eps) = match generate(config, seed) {
        Ok(pair) => pair,
        Err(e) => return tags.iter().map(|t| TrialResult::failed(trial, seed, t, &e, 0.0)).collect(),
    };
    let reference = match oracle(&data) {
        Ok(o) => Reference { nmse: o.nmse, ce: o.ce },
        Err(e) => return tags.iter().map(|t| TrialResult::failed(trial, seed, t, &e, 0.0)).collect(),
    };

    if !config.family.is_bounded_error() {
        let start = Instant::now();
        let result = solve_switching_trial(config, &data, seed).and_then(|est| {
            let t = start.elapsed().as_secs_f64();
            fill(trial, seed, "sw", &data, &reference, est, t)
        });
        return vec![result.unwrap_or_else(|e| TrialResult::failed(trial, seed, "sw", &e, start.elapsed().as_secs_f64()))];
    }

    config
        .losses()
        .into_iter()
        .map(|loss| {
            let tag = loss_tag(loss);
            let start = Instant::now();
            let estimate = if config.family == Family::BakoSystem {
                decompose_trial(config, &data, eps, loss, seed)
            } else {
                solve_be_trial(config, &data, eps, loss, seed)
            };
            estimate
                .and_then(|est| fill(trial, seed, tag, &data, &reference, est, start.elapsed().as_secs_f64()))
                .unwrap_or_else(|e| TrialResult::failed(trial, seed, tag, &e, start.elapsed().as_secs_f64()))
        })
        .collect()
}

fn solve_switching_trial(config: &ExperimentConfig, data: &Dataset, seed: u64) -> Result<Estimate> {
    let n = data.true_params().map_or(config.n, <[_]>::len);
    let options = SwitchingOptions {
        init_box: Some(BoxRegion::symmetric(n * data.dim(), config.box_halfwidth)?),
        restarts: config.restarts,
        seed,
        engine: config.engine(),
        ..SwitchingOptions::default()
    };
    let sol = solve_switching(data, n, &options)?;
    Ok(Estimate { params: sol.model.to_modes(), reports: vec![sol.report] })
}

fn be_options(config: &ExperimentConfig, d: usize, seed: u64) -> Result<BeOptions> {
    Ok(BeOptions {
        init_box: Some(BoxRegion::symmetric(d, config.box_halfwidth)?),
        restarts: config.restarts,
        seed,
        engine: config.engine(),
        ..BeOptions::default()
    })
}

fn solve_be_trial(config: &ExperimentConfig, data: &Dataset, eps: f64, loss: Saturation, seed: u64) -> Result<Estimate> {
    let all: Vec<usize> = (0..data.len()).collect();
    let sol = solve_be(data, &all, eps, loss, &be_options(config, data.dim(), seed)?)?;
    Ok(Estimate { params: vec![sol.params], reports: vec![sol.report] })
}

fn decompose_trial(config: &ExperimentConfig, data: &Dataset, eps: f64, loss: Saturation, seed: u64) -> Result<Estimate> {
    let options = DecomposeOptions {
        min_support: config.min_support.unwrap_or_else(|| config.default_min_support()),
        max_models: None,
        solve: be_options(config, data.dim(), seed)?,
    };
    let dec = decompose(data, eps, loss, &options)?;
    Ok(Estimate { params: dec.params(), reports: dec.reports })
}

/// Runs every trial of `config`. Individual trial failures are recorded in
/// the results; only an invalid configuration is an error.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let per_trial: Vec<Vec<TrialResult>> = if config.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..config.trials).into_par_iter().map(|t| run_trial(config, t)).collect())
    } else {
        (0..config.trials).map(|t| run_trial(config, t)).collect()
    };
    let trials: Vec<TrialResult> = per_trial.into_iter().flatten().collect();
    let mut losses: Vec<String> = Vec::new();
    for r in &trials {
        if !losses.contains(&r.loss) {
            losses.push(r.loss.clone());
        }
    }
    let aggregates = losses
        .iter()
        .map(|loss| {
            let rows: Vec<&TrialResult> = trials.iter().filter(|r| &r.loss == loss).collect();
            aggregate(loss, &rows)
        })
        .collect();
    Ok(ExperimentOutput { config: config.clone(), trials, aggregates })
}

/// `dir/stem.tag.ext` next to `path`.
pub fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

impl ExperimentOutput {
    pub fn timings(&self) -> Vec<Timing> {
        self.trials.iter().map(|r| Timing { trial: r.trial, loss: r.loss.clone(), wall_time: r.wall_time }).collect()
    }

    pub fn has_failures(&self) -> bool {
        self.trials.iter().any(TrialResult::is_failure)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn trials_csv(&self) -> Result<String> {
        to_csv(&self.trials)
    }

    pub fn aggregates_csv(&self) -> Result<String> {
        to_csv(&self.aggregates)
    }

    /// Writes the results to `path` and the wall times next to it. CSV output
    /// puts the per-trial rows in `path` and the aggregates in
    /// `<stem>.aggregate.csv`; JSON holds everything in one document.
    /// Returns the paths written.
    pub fn write(&self, path: &Path, format: Format) -> Result<Vec<PathBuf>> {
        let timing_path = sibling(path, "timing");
        let mut written = vec![path.to_path_buf()];
        match format {
            Format::Json => {
                write_file(path, &self.to_json()?)?;
                write_file(&timing_path, &serde_json::to_string_pretty(&self.timings())?)?;
            }
            Format::Csv => {
                write_file(path, &self.trials_csv()?)?;
                let agg = sibling(path, "aggregate");
                write_file(&agg, &self.aggregates_csv()?)?;
                written.push(agg);
                write_file(&timing_path, &to_csv(&self.timings())?)?;
            }
        }
        written.push(timing_path);
        Ok(written)
    }

    /// Human-readable summary, one line per loss.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{} (N = {}, {} trials)\n{:<5} {:>22} {:>16} {:>22} {:>9} {:>9} {:>7}\n",
            self.config.family,
            self.config.points,
            self.config.trials,
            "loss",
            "NMSE",
            "CE (%)",
            "oracle NMSE",
            "recovery",
            "certified",
            "models"
        );
        for a in &self.aggregates {
            let times: Vec<f64> =
                self.trials.iter().filter(|r| r.loss == a.loss && !r.is_failure()).map(|r| r.wall_time).collect();
            let (tm, ts) = mean_std(times.into_iter());
            out.push_str(&format!(
                "{:<5} {:>10.3e} ± {:<9.2e} {:>6.2} ± {:<6.2} {:>10.3e} ± {:<9.2e} {:>8.0}% {:>5}/{:<3} {:>7.2}\n",
                a.loss,
                a.nmse_mean,
                a.nmse_std,
                100.0 * a.ce_mean,
                100.0 * a.ce_std,
                a.oracle_nmse_mean,
                a.oracle_nmse_std,
                100.0 * a.recovery_rate,
                a.certified,
                a.trials,
                a.n_estimated_mean,
            ));
            out.push_str(&format!("      time {tm:.3} ± {ts:.3} s, {} failed\n", a.failures));
        }
        out
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in rows {
        wtr.serialize(row)?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}
