//! Command-line orchestration: configuration files, table loading, runs,
//! sweeps and CSV outputs. The `qgame` binary is a thin clap front end over
//! this module.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_equilibria, cmd_run, cmd_static_table, cmd_sweep, exit, exit_code, load_table, RunOutput,
    StaticTableRow,
};
pub use config::{Cell, ResolvedConfig, RunConfigFile};
