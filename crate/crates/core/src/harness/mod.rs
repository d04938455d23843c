//! Scenario configuration, runs, sweeps and the standalone suites.

pub mod config;
pub mod run;
pub mod scenario;
pub mod suites;
pub mod sweep;

pub use config::Config;
pub use run::{run_scenario, trace_csv, RunOutcome};
pub use scenario::{Check, EpsilonPolicy, InitialData, Scenario};
pub use suites::{selftest, verify_fields};
pub use sweep::{sweep, SweepResult};
