//! Configuration, experiment drivers and result output.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig, SweepKind};
pub use experiments::{
    run_power_sweep, run_pseudo_true, run_sigma_sweep, PowerSweepRow, PseudoTrueReport, SigmaSweepRow, Setup,
};
pub use output::{write_csv, CsvRow};
