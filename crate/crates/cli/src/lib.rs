//! Configuration-driven runner for the kerrloss engine: parses flat
//! scenario files, runs the named experiments and writes CSV grids, time
//! series and a JSON manifest per run.

pub mod config;
pub mod error;
pub mod output;
pub mod scenarios;

pub use config::{Entries, Scenario, ScenarioConfig};
pub use error::CliError;
pub use output::RunManifest;
pub use scenarios::{crescent_state, run, Panel, PANELS};
