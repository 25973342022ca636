//! Scenario files, presets, and result output for the `multibgk` binary.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{ConfigError, ScenarioConfig};
pub use run::{execute, run_scenario, Overrides, RunError, RunOutcome};
