//! Experiment harness: configuration, synthetic and real-data runs, and
//! report emission.

pub mod config;
pub mod discretize;
pub mod experiments;
pub mod io;
pub mod real_pairs;
pub mod report;

pub use config::{ExperimentConfig, Family, Method, Resampling};
pub use discretize::{discretize_column, DiscretizeRule};
pub use experiments::{run_accuracy, run_decision_rate_curve, run_threshold_study, run_timing};
pub use real_pairs::run_real_pairs;
pub use report::{ExperimentKind, ExperimentReport, ReportRow, Tally};
