//! Batch scenario execution for the ansatz toolkit: read a JSON config
//! describing equation, function family, grid and tolerances; run
//! construct → solve → differentiate → residual; emit a JSON or CSV
//! report with per-point records and a recomputable summary.

pub mod config;
pub mod report;
pub mod runner;

pub use config::{Equation, ReportFormat, ScenarioConfig};
pub use report::{PointRecord, ResidualReport, Summary};
pub use runner::{passes_gate, run_scenario, RunError};
