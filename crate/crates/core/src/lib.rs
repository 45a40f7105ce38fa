//! Weighted Tsetlin Machine classifier and a feature-selection benchmark.
//!
//! The crate is organised bottom-up:
//!
//! * [`tm`]: clauses, Type I/II feedback, training and model dumps.
//! * [`data`]: CSV ingestion, thermometer binarization, stratified splits,
//!   synthetic generators and bundled fixtures.
//! * [`weights`]: literal incidence and class-by-column clause-weight views.
//! * [`scorers`]: filter, embedded, wrapper and attribution feature scorers.
//! * [`eval`]: insertion/deletion/ROAR/ROAD retraining curves and the
//!   benchmark runner.
//! * [`analysis`]: top-5 tallies, speed/quality tables, rank correlation,
//!   average-linkage clustering and heatmaps.

pub mod analysis;
pub mod bits;
pub mod data;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod rng;
pub mod scorers;
pub mod tm;
pub mod weights;

#[cfg(test)]
mod testutil;

pub use data::{BinaryDataset, FeatureMap, PreparedData, RawDataset};
pub use error::{Error, Result};
pub use tm::{HyperParams, TmClassifier};
