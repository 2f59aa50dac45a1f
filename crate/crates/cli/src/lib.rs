//! Experiment harness for `gausslearn-core`: configuration, JSON/CSV formats, seeded
//! sweeps and the pipelines behind the `gausslearn` binary.

pub mod config;
pub mod fixtures;
pub mod io;
pub mod run;
pub mod sweeps;

pub use config::{ConfigError, ExperimentConfig, Task};
pub use run::{run_experiment, Outcome};
