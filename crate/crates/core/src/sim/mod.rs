//! Batch front end: configurations, built-in scenarios, receivers and
//! output files.

pub mod config;
pub mod convergence;
pub mod output;
pub mod run;
pub mod scenarios;

pub use config::RunConfig;
pub use run::{prepare, run, Manifest, Prepared};
pub use scenarios::{scenario, SCENARIOS};
