//! Config files, sweeps and CSV output for `tunnelbox`.

pub mod config;
pub mod describe;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig, OutputKind, SweepAxis};
pub use describe::describe;
pub use run::{run_experiment, RunError, RunManifest};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NUMERICAL: i32 = 2;
    pub const PARTIAL: i32 = 3;
}
