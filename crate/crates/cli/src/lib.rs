//! Library side of the `ptchain` command-line tool: config parsing, the
//! per-command pipelines and table serialization.

// Negated float comparisons are deliberate: they send NaN down the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;
pub mod table;

pub use config::{parse_config, Command, ConfigError, Format, RunConfig};
pub use run::{run, CheckFailure, CliError, RunOutcome};
pub use table::{Cell, Table};
