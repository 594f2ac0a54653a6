//! Fit a two-mode switching linear model to random data and read the
//! certificate that comes with it.
//!
//! cargo run --release --example switching_regression

use globreg::bench::{classification_error, gen_switching, nmse, oracle};
use globreg::swreg::{solve_switching, SwitchingOptions};

fn main() -> globreg::Result<()> {
    let data = gen_switching(2, 2, 1000, 0.1, 7)?;
    let sol = solve_switching(&data, 2, &SwitchingOptions::default())?;

    println!("estimated modes (canonical order):");
    for j in 0..sol.model.modes() {
        println!("  {:?}", sol.model.mode(j));
    }
    println!("true modes:");
    for theta in data.true_params().unwrap() {
        println!("  {theta:?}");
    }

    let r = &sol.report;
    println!(
        "cost {:.6} with lower bound {:.6} (gap {:.2e}) after {} iterations, {:?}",
        r.upper, r.lower, r.relative_gap, r.iterations, r.terminated_by
    );
    println!(
        "NMSE {:.3e}, classification error {:.2}%; least squares on the true labels gives NMSE {:.3e}",
        nmse(&sol.model.to_modes(), data.true_params().unwrap())?,
        100.0 * classification_error(&sol.model, &data)?,
        oracle(&data)?.nmse
    );
    Ok(())
}
