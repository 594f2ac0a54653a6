mod common;

use globreg::bench::generate::gen_switching;
use globreg::bnb::SolveOptions;
use globreg::swreg::{cost_sw, solve_switching, SwitchingOptions};
use globreg::Termination;

#[test]
fn matches_exhaustive_assignment() {
    let mut checked = 0;
    for seed in 1..40u64 {
        let d = 1 + (seed as usize % 2);
        let data = gen_switching(2, d, 9, 0.1, seed).unwrap();
        let (best, fits, sizes) = common::brute_force_two_modes(&data);
        if sizes.iter().any(|&s| s <= d) || fits.iter().flatten().any(|v| v.abs() > 10.0) {
            continue;
        }
        checked += 1;
        let sol = solve_switching(&data, 2, &SwitchingOptions { seed, ..SwitchingOptions::default() }).unwrap();
        assert!(sol.report.terminated_by.is_certified());
        assert!(sol.report.lower <= best * (1.0 + 1e-9), "seed {seed}: lower bound above the optimum");
        assert!((sol.report.upper - best) / best <= 1e-3, "seed {seed}: {} vs {best}", sol.report.upper);
        assert!((cost_sw(&sol.model, &data).unwrap() - sol.report.upper).abs() <= 1e-9 * (1.0 + best));
    }
    assert!(checked >= 15);
}

#[test]
fn noiseless_data_is_fit_exactly() {
    let data = gen_switching(2, 2, 200, 0.0, 5).unwrap();
    let options = SwitchingOptions {
        engine: SolveOptions { tol: 1e-8, absolute_gap: true, ..SolveOptions::default() },
        ..SwitchingOptions::default()
    };
    let sol = solve_switching(&data, 2, &options).unwrap();
    assert!(sol.report.upper < 1e-8);
    let truth = data.true_params().unwrap();
    for theta in truth {
        let close = (0..2).any(|j| sol.model.mode(j).iter().zip(theta).all(|(a, b)| (a - b).abs() < 1e-4));
        assert!(close, "{theta:?} not recovered: {:?}", sol.model.to_modes());
    }
}

#[test]
fn parallel_bounding_agrees_with_serial() {
    let data = gen_switching(2, 2, 300, 0.1, 11).unwrap();
    let run = |workers| {
        let options = SwitchingOptions { engine: SolveOptions { workers, ..SolveOptions::default() }, ..SwitchingOptions::default() };
        solve_switching(&data, 2, &options).unwrap()
    };
    let (a, b) = (run(1), run(2));
    assert_eq!(a.model, b.model);
    assert_eq!(a.report.upper, b.report.upper);
    assert_eq!(a.report.iterations, b.report.iterations);
    assert_ne!(a.report.terminated_by, Termination::NodeLimit);
}
