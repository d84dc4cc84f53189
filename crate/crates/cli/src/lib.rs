//! Scenario runner for `monodromy-core`: JSON scenario documents in,
//! canonical reports out.

pub mod acceptance;
pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::LabError;
pub use report::{emit_report, Report};
pub use run::run_scenario;
pub use scenario::{Format, Scenario};
