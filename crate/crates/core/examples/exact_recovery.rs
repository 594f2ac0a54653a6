//! With noiseless inliers a tiny tube recovers the parameter vector exactly,
//! even when 90% of the points are corrupted.
//!
//! cargo run --release --example exact_recovery

use globreg::bench::exact_recovery;
use globreg::bench::generate::{gen_robust, RobustSpec};
use globreg::berr::{solve_be, BeOptions, Saturation};

fn main() -> globreg::Result<()> {
    for affine in [false, true] {
        let spec = RobustSpec { d: 4, points: 500, ratio: 0.9, sigma: 0.0, positive_only: affine, affine };
        let data = gen_robust(&spec, 11)?;
        let all: Vec<usize> = (0..data.len()).collect();
        let theta = &data.true_params().unwrap()[0];
        for loss in [Saturation::Count, Saturation::Squared] {
            let sol = solve_be(&data, &all, 1e-6, loss, &BeOptions::default())?;
            let err: f64 = sol.params.iter().zip(theta).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            println!(
                "{} model, p = {}: |w - theta| = {err:.2e}, recovered: {}",
                if affine { "affine" } else { "linear" },
                loss.p(),
                exact_recovery(&sol.params, theta)
            );
        }
    }
    Ok(())
}
