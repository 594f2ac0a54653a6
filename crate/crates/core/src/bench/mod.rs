//! Synthetic experiments: data generators, accuracy metrics and a runner
//! that writes per-trial and aggregate tables.

pub mod experiment;
pub mod generate;
pub mod metrics;

pub use experiment::{run_experiment, Aggregate, ExperimentConfig, ExperimentOutput, Family, TrialResult};
pub use generate::{gen_bako, gen_robust, gen_switching, gen_vidal, RobustSpec};
pub use metrics::{classification_error, exact_recovery, nmse, oracle, Oracle};
