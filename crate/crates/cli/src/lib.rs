//! Command-line front end: TOML experiment configs in, JSON or CSV reports
//! out.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use output::write_output;
pub use run::{run, RunOutput};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// A method failed, a θ estimate fell outside `[0, 1]` or a check failed.
    pub const FAILURE: i32 = 1;
    /// Bad arguments or configuration.
    pub const USAGE: i32 = 2;
}
