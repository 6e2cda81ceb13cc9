//! Command-line front end for the `rbc-sched` simulator: configuration
//! files, experiment commands and result emission.

pub mod commands;
pub mod config;
pub mod emit;

pub use commands::{cmd_compare, cmd_profile, cmd_run, cmd_sweep, CliError, Output};
pub use config::{
    parse_config, parse_config_seeded, parse_config_str, render_config, ConfigError, Experiment,
};
pub use emit::{emit_results, emit_summary, CompareRow, Format};
