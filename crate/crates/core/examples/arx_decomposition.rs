//! Bounded-error identification of a three-mode ARX system without knowing
//! the number of modes: fit one model at a time and peel off its points.
//!
//! cargo run --release --example arx_decomposition

use globreg::bench::generate::{bako_params, gen_bako};
use globreg::bench::nmse;
use globreg::berr::{decompose, BeOptions, DecomposeOptions, Saturation};

fn main() -> globreg::Result<()> {
    let (data, sigma) = gen_bako(3, 300, 30.0, 5)?;
    let eps = 1.5 * sigma;
    println!("noise standard deviation {sigma:.4}, tube half-width {eps:.4}");

    let options = DecomposeOptions {
        // Stop once a model would explain fewer than 5% of the points.
        min_support: 15,
        max_models: None,
        solve: BeOptions::default(),
    };
    for loss in [Saturation::Count, Saturation::Squared] {
        let dec = decompose(&data, eps, loss, &options)?;
        println!("p = {}: {} models, {} points left over", loss.p(), dec.n_estimated(), dec.leftover.len());
        for m in &dec.submodels {
            let w: Vec<String> = m.params.iter().map(|v| format!("{v:.3}")).collect();
            println!("  [{}] explains {} points", w.join(", "), m.covered.len());
        }
        println!("  NMSE {:.3e}", nmse(&dec.params(), &bako_params())?);
    }
    Ok(())
}
