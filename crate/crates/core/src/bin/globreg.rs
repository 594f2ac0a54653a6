//! Command-line front end: dataset generation, the three solvers and the
//! benchmark runner.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use globreg::bench::experiment::{ExperimentConfig, Family, Format};
use globreg::bench::generate::{gen_bako, gen_robust, gen_switching, gen_vidal, RobustSpec};
use globreg::bench::run_experiment;
use globreg::berr::{decompose, solve_be, BeOptions, DecomposeOptions, Saturation};
use globreg::bnb::SolveOptions;
use globreg::swreg::{solve_switching, SwitchingOptions};
use globreg::{BoxRegion, Dataset, Error, SolveReport};

#[derive(Parser)]
#[command(name = "globreg", version, about = "Certified branch-and-bound for switching and bounded-error regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset in CSV form.
    Gen(GenArgs),
    /// Globally fit an n-mode switching regression model.
    SolveSwitching(SolveArgs),
    /// Globally fit one model under a saturated loss.
    SolveBe(SolveArgs),
    /// Greedy bounded-error decomposition into as many models as needed.
    Decompose(SolveArgs),
    /// Run a benchmark family and write per-trial and aggregate tables.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// switching-random, vidal-benchmark, bako-system, robust-outliers or exact-recovery
    family: Family,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "N")]
    points: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    /// Affine model with positive outliers.
    #[arg(long)]
    affine: bool,
    #[arg(long, default_value_t = 30.0)]
    snr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 10.0)]
    box_halfwidth: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<usize>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
}

impl EngineArgs {
    fn engine(&self) -> SolveOptions {
        SolveOptions {
            tol: self.tol,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            node_limit: self.node_limit,
            workers: self.workers,
            ..SolveOptions::default()
        }
    }

    fn be(&self, d: usize) -> Result<BeOptions, Error> {
        Ok(BeOptions {
            init_box: Some(BoxRegion::symmetric(d, self.box_halfwidth)?),
            restarts: self.restarts,
            seed: self.seed,
            engine: self.engine(),
            ..BeOptions::default()
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Dataset CSV with columns x_1..x_d,y[,q].
    #[arg(long)]
    data: PathBuf,
    /// Number of modes (switching regression).
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Tube half-width (bounded error).
    #[arg(long)]
    eps: Option<f64>,
    /// Saturated loss exponent, 0 or 2.
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Smallest number of points a decomposition submodel may explain.
    #[arg(long, default_value_t = 1)]
    min_support: usize,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct BenchArgs {
    family: Family,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "N")]
    points: Option<usize>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Saturated loss exponent; both 0 and 2 when omitted.
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    affine: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    min_support: Option<usize>,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    params: Vec<Vec<f64>>,
    report: &'a SolveReport,
}

#[derive(Serialize)]
struct ReportRow<'a> {
    upper: f64,
    lower: f64,
    relative_gap: f64,
    iterations: usize,
    boxes_explored: usize,
    boxes_pruned: usize,
    wall_time: f64,
    terminated_by: &'a str,
    best_point: String,
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn report_text(params: Vec<Vec<f64>>, reports: &[SolveReport], format: Format) -> Result<String, Error> {
    match format {
        Format::Json => {
            let text = if let [report] = reports {
                serde_json::to_string_pretty(&SolveOutput { params, report })?
            } else {
                serde_json::to_string_pretty(&serde_json::json!({ "params": params, "reports": reports }))?
            };
            Ok(text + "\n")
        }
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(Vec::new());
            for r in reports {
                let tag = serde_json::to_value(r.terminated_by)?;
                wtr.serialize(ReportRow {
                    upper: r.upper,
                    lower: r.lower,
                    relative_gap: r.relative_gap,
                    iterations: r.iterations,
                    boxes_explored: r.boxes_explored,
                    boxes_pruned: r.boxes_pruned,
                    wall_time: r.wall_time,
                    terminated_by: tag.as_str().unwrap_or_default(),
                    best_point: r.best_point.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" "),
                })?;
            }
            let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

fn require_eps(eps: Option<f64>) -> Result<f64, Error> {
    eps.ok_or_else(|| Error::InvalidParameter("--eps is required".into()))
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Gen(a) => {
            let config = ExperimentConfig::new(a.family);
            let n = a.n.unwrap_or(config.n);
            let d = a.d.unwrap_or(config.d);
            let points = a.points.unwrap_or(config.points);
            let sigma = a.sigma.unwrap_or(config.sigma);
            let data = match a.family {
                Family::SwitchingRandom => gen_switching(n, d, points, sigma, a.seed)?,
                Family::VidalBenchmark => gen_vidal(points, sigma, a.seed)?,
                Family::BakoSystem => {
                    let (data, sigma) = gen_bako(n, points, a.snr, a.seed)?;
                    eprintln!("noise standard deviation {sigma:.6e}");
                    data
                }
                Family::RobustOutliers | Family::ExactRecovery => {
                    let spec = RobustSpec {
                        d,
                        points,
                        ratio: a.ratio.unwrap_or(config.ratio),
                        sigma,
                        positive_only: a.affine,
                        affine: a.affine,
                    };
                    gen_robust(&spec, a.seed)?
                }
            };
            let mut buf = Vec::new();
            data.write_csv(&mut buf)?;
            emit(&String::from_utf8(buf).expect("csv output is utf-8"), a.out.as_deref())?;
        }
        Command::SolveSwitching(a) => {
            let data = Dataset::load(&a.data)?;
            let options = SwitchingOptions {
                init_box: Some(BoxRegion::symmetric(a.n * data.dim(), a.engine.box_halfwidth)?),
                restarts: a.engine.restarts,
                seed: a.engine.seed,
                engine: a.engine.engine(),
                ..SwitchingOptions::default()
            };
            let sol = solve_switching(&data, a.n, &options)?;
            let text = report_text(sol.model.to_modes(), std::slice::from_ref(&sol.report), a.engine.format)?;
            emit(&text, a.engine.out.as_deref())?;
        }
        Command::SolveBe(a) => {
            let data = Dataset::load(&a.data)?;
            let all: Vec<usize> = (0..data.len()).collect();
            let loss = Saturation::from_p(a.p)?;
            let sol = solve_be(&data, &all, require_eps(a.eps)?, loss, &a.engine.be(data.dim())?)?;
            let text = report_text(vec![sol.params], std::slice::from_ref(&sol.report), a.engine.format)?;
            emit(&text, a.engine.out.as_deref())?;
        }
        Command::Decompose(a) => {
            let data = Dataset::load(&a.data)?;
            let options =
                DecomposeOptions { min_support: a.min_support, max_models: None, solve: a.engine.be(data.dim())? };
            let dec = decompose(&data, require_eps(a.eps)?, Saturation::from_p(a.p)?, &options)?;
            eprintln!("{} submodels, {} points left over", dec.n_estimated(), dec.leftover.len());
            let text = report_text(dec.params(), &dec.reports, a.engine.format)?;
            emit(&text, a.engine.out.as_deref())?;
        }
        Command::Bench(a) => {
            let base = ExperimentConfig::new(a.family);
            let config = ExperimentConfig {
                n: a.n.unwrap_or(base.n),
                d: a.d.unwrap_or(base.d),
                points: a.points.unwrap_or(base.points),
                sigma: a.sigma.unwrap_or(base.sigma),
                ratio: a.ratio.unwrap_or(base.ratio),
                eps: a.eps,
                p: a.p,
                affine: a.affine,
                tol: a.engine.tol,
                box_halfwidth: a.engine.box_halfwidth,
                seed: a.engine.seed,
                trials: a.trials.unwrap_or(base.trials),
                restarts: a.engine.restarts,
                min_support: a.min_support,
                time_limit: a.engine.time_limit,
                node_limit: a.engine.node_limit,
                workers: a.engine.workers,
                ..base
            };
            let output = run_experiment(&config)?;
            match &a.engine.out {
                Some(path) => {
                    for p in output.write(path, a.engine.format)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => match a.engine.format {
                    Format::Json => println!("{}", output.to_json()?),
                    Format::Csv => print!("{}", output.aggregates_csv()?),
                },
            }
            eprint!("{}", output.table());
            if output.has_failures() {
                eprintln!("some trials failed; see the `error` column");
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
