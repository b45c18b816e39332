//! End-to-end runs over a fixture directory: configuration, loading,
//! estimation, output writing, validation and reporting.

mod config;
pub mod estimate;
pub mod fixtures;
pub mod report;
pub mod run;
pub mod validate;

pub use config::*;
pub use estimate::{estimate, Estimates};
pub use report::{report, ReportStyle};
pub use run::{run, RunManifest, RunSummary};
pub use validate::{validate, ValidationReport};
