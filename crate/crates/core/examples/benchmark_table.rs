//! Run a benchmark family programmatically and print its summary table.
//! Pass a family name to pick another one (default: robust-outliers).
//!
//! cargo run --release --example benchmark_table -- exact-recovery

use globreg::bench::{run_experiment, ExperimentConfig, Family};

fn main() -> globreg::Result<()> {
    let family: Family = std::env::args().nth(1).as_deref().unwrap_or("robust-outliers").parse()?;
    let config = ExperimentConfig { trials: 3, ..ExperimentConfig::new(family) };
    let out = run_experiment(&config)?;
    print!("{}", out.table());
    for r in &out.trials {
        println!(
            "trial {} ({}): NMSE {:.3e}, CE {:.3}, {} model(s), {} boxes",
            r.trial, r.loss, r.nmse, r.ce, r.n_estimated, r.boxes_explored
        );
    }
    Ok(())
}
