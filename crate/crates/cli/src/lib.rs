//! Library backing the `scf-lab` binary; commands are exposed as functions
//! so integration tests can check outputs byte for byte.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod instance;
pub mod report;
pub mod verify;

pub use commands::{
    cmd_analyze, cmd_classify, cmd_optimize, cmd_orbit, cmd_simulate, cmd_sweep, Format,
};
pub use error::CliError;
pub use instance::{InstanceFile, Tolerances, SCHEMA_VERSION};
pub use verify::cmd_verify;
