//! Robust regression with more outliers than inliers. Both saturated losses
//! ignore gross errors beyond the tube half-width `eps`.
//!
//! cargo run --release --example robust_fit

use globreg::bench::generate::{gen_robust, RobustSpec};
use globreg::bench::{nmse, oracle};
use globreg::berr::{cost_be0, inliers, solve_be, BeOptions, Saturation};
use globreg::lstsq::ols;

fn main() -> globreg::Result<()> {
    let spec = RobustSpec { d: 4, points: 500, ratio: 0.6, sigma: 0.2, positive_only: false, affine: false };
    let data = gen_robust(&spec, 3)?;
    let all: Vec<usize> = (0..data.len()).collect();
    let truth = data.true_params().unwrap();
    let eps = 1.5 * spec.sigma;

    let plain = ols(&data, &all)?;
    println!("ordinary least squares NMSE {:.3e}", nmse(&[plain.params], truth)?);

    for loss in [Saturation::Count, Saturation::Squared] {
        let sol = solve_be(&data, &all, eps, loss, &BeOptions::default())?;
        println!(
            "p = {}: NMSE {:.3e}, {} points outside the tube, {} inliers, {:?}",
            loss.p(),
            nmse(&[sol.params.clone()], truth)?,
            cost_be0(&sol.params, &all, &data, eps)?,
            inliers(&sol.params, &all, &data, eps).len(),
            sol.report.terminated_by
        );
    }
    println!("least squares on the true inliers: NMSE {:.3e}", oracle(&data)?.nmse);
    Ok(())
}
