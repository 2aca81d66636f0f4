//! Experiment orchestration and report emission for the fractional-calculus
//! toolkit; the `fraclab` binary is a thin wrapper over this crate.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, GridConfig};
pub use experiments::{run, HarnessError};
pub use report::{ReportMetadata, SweepReport, SweepRow};
