//! Scenario runner for the PEV bottleneck incentive model.
//!
//! A scenario file fixes the commute, a list of budgets and an optional
//! sweep; [`run_scenario`] writes one queue and one price series per budget,
//! a report row per budget, the sweep table and a column schema.

pub mod config;
pub mod error;
pub mod run;

pub use config::{ScenarioConfig, SweepSpec};
pub use error::CliError;
pub use run::{budget_label, run_scenario, BudgetPoint, OracleSummary, RunSummary, SweepRow};
