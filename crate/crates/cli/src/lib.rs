//! Scenario files, the task runner and report output behind the `qcord` binary.

pub mod builtin;
pub mod model;
pub mod report;
pub mod run;
pub mod syntax;

pub use model::{build_scenario, Overrides, Scenario, Settings};
pub use report::{Format, Report, Status};
pub use run::{run_scenario, TASK_KINDS};
