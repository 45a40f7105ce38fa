//! Weighted multiclass Tsetlin Machine.

mod clause;
mod io;
mod machine;
mod params;

pub use clause::{Clause, EvalMode, Polarity};
pub use machine::{ClassSums, TmClassifier};
pub use params::{tuned_dataset_names, tuned_settings, HyperParams, DEFAULT_STATES_PER_ACTION};
