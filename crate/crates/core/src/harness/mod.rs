//! Experiment orchestration: configs, exact and Monte Carlo evaluation,
//! adversarial orders, reports and the hard i.i.d. instance.

mod adversary;
mod config;
mod hardness;
mod report;
mod run;

use thiserror::Error;

use crate::matroid::MatroidError;
use crate::policies::PolicyError;

pub use adversary::{adversary_order, worstcase_order_search, WorstCase, MAX_SEARCH_RUNS};
pub use config::{
    build_prototype, Adversary, AssignmentModel, BasePolicy, BoundKind, BoundSpec, Evaluation, ExperimentConfig,
    InfoMode, MatroidSource, Number, OrderModel, PolicyMaker, PolicySpec, WeightModel, MAX_EXHAUSTIVE_ASSIGNMENTS,
    MAX_EXHAUSTIVE_ORDERS,
};
pub use hardness::{
    default_truncation, expected_max_exact, gamma_for_horizon, hard_instance, hardness_sweep, levels_within,
    optimal_stopping_value, stopping_point, HardDistribution, HardInstance, HardnessReport, LevelRow, PolicySweep,
    SingleChoice, Truncated,
};
pub use report::{ExactSummary, Report, TrialRecord};
pub use run::{run_experiment, run_experiment_range, trial_seed, MAX_EXACT_RUNS};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error("cannot merge reports: {0}")]
    Merge(String),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}
