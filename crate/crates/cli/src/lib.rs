//! Run-file driven front end for the `fysolve-core` solvers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod record;
pub mod run;

pub use config::{load_config, ConfigError, RunConfig, Task};
pub use record::ResultRecord;
pub use run::{run, Outcome, RunOptions, EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_SOLVER};
