//! Retrain-based evaluation of feature rankings.

mod benchmark;
mod curve;
mod protocol;
pub mod records;

pub use benchmark::{baseline_record, dataset_seed, reference_model, run_benchmark, BenchmarkConfig, BenchmarkDataset};
pub use curve::{
    default_k_grid, evaluate_curve, evaluate_point, mean_std, trapezoid_auc, trial_seed, EvalConfig, PruningCurve,
    TrialResult,
};
pub use protocol::{apply_protocol, parse_protocols, Protocol};
pub use records::{ResultTable, SCHEMA_VERSION};
