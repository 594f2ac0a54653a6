//! Certified global optimization for switching linear regression and
//! bounded-error estimation.
//!
//! Every solver runs a best-first branch-and-bound over boxes of parameter
//! space and returns a [`SolveReport`] whose `upper` and `lower` fields bracket
//! the global minimum. The pieces are usable on their own:
//!
//! - [`bounds`]: interval brackets of residuals over a box;
//! - [`lstsq`]: ordinary and box-constrained least squares;
//! - [`bnb`]: the generic engine and its [`bnb::Problem`] contract;
//! - [`swreg`]: switching regression with `n` modes;
//! - [`berr`]: saturated-loss estimation and greedy decomposition;
//! - [`bench`]: synthetic data generators, metrics and the experiment runner.
//!
//! ```
//! use globreg::{swreg, Dataset};
//!
//! // Two lines through the origin: y = 2x and y = -x.
//! let data = Dataset::from_flat(1, vec![1.0, 2.0, -1.0, 3.0], vec![2.0, 4.0, 1.0, -3.0]).unwrap();
//! let mut options = swreg::SwitchingOptions::default();
//! options.restarts = 5;
//! options.engine.absolute_gap = true;
//! options.engine.tol = 1e-9;
//! let sol = swreg::solve_switching(&data, 2, &options).unwrap();
//! assert!(sol.report.upper < 1e-9);
//! assert!((sol.model.mode(0)[0] + 1.0).abs() < 1e-4);
//! ```

pub mod bench;
pub mod berr;
pub mod bnb;
pub mod bounds;
pub mod dataset;
pub mod error;
pub mod lstsq;
pub mod model;
pub mod region;
pub mod report;
pub mod swreg;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use model::{LossKind, SwitchingModel};
pub use region::BoxRegion;
pub use report::{SolveReport, Termination};
