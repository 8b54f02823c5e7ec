//! Scenario files, built-in scenarios, trajectory output and experiment runs.

pub mod builtin;
pub mod runner;
pub mod scenario_file;
pub mod svg;
pub mod trajectory_csv;
pub mod validate;

pub use builtin::{builtin, BUILTIN_NAMES};
pub use runner::{run, run_scenario, RunConfig, RunReport, ScenarioSource, SeedRange};
pub use scenario_file::{parse_scenario, read_scenario_file, scenario_to_toml};
pub use trajectory_csv::{read_trajectory, write_trajectory, CsvLayout};
pub use validate::{validate, Suite, ValidationReport};
