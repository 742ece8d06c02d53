//! Experiment sweeps over sparse-grid DG discretizations.
//!
//! Every subcommand produces a [`Report`]: one [`Record`] per parameter
//! combination, written as CSV, plus a JSON [`Summary`] with fitted
//! log-log slopes and the run environment.

pub mod commands;
pub mod record;
pub mod sweep;

pub use commands::{
    cmd_bench, cmd_evolve, cmd_interp, cmd_nnz, BenchConfig, EvolveConfig, InterpConfig, NnzConfig, Wave,
};
pub use record::{read_csv, summary_path, Fit, Record, Report, Status, Summary, COLUMNS, SCHEMA_VERSION};
pub use sweep::{default_wave, parse_range, Sweep};
