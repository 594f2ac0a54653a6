//! Identify a switched ARX system: two modes, two past outputs and two past
//! inputs per regressor.
//!
//! cargo run --release --example switched_arx

use globreg::bench::generate::{gen_vidal, vidal_params};
use globreg::bench::{classification_error, nmse, oracle};
use globreg::swreg::{solve_switching, SwitchingOptions};

fn main() -> globreg::Result<()> {
    let data = gen_vidal(1000, 0.2, 1)?;
    let sol = solve_switching(&data, 2, &SwitchingOptions::default())?;

    for (j, theta) in vidal_params().iter().enumerate() {
        println!("mode {j} true      {theta:?}");
    }
    for j in 0..2 {
        let w: Vec<String> = sol.model.mode(j).iter().map(|v| format!("{v:.4}")).collect();
        println!("estimate {j}       [{}]", w.join(", "));
    }
    println!(
        "NMSE {:.3e} (oracle {:.3e}), classification error {:.2}%, certified: {}",
        nmse(&sol.model.to_modes(), data.true_params().unwrap())?,
        oracle(&data)?.nmse,
        100.0 * classification_error(&sol.model, &data)?,
        sol.report.terminated_by.is_certified()
    );
    Ok(())
}
