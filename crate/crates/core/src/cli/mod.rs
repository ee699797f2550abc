//! Command-line front end: parameter sweeps rendered as CSV or JSON tables,
//! plus the `validate` report.

mod commands;
mod config;
mod table;
mod validate;

pub use commands::{
    cmd_collapse_audit, cmd_decoherence_curve, cmd_entropy, cmd_pointer, cmd_scaling_study, run_experiment,
};
pub use config::{
    parse_config_text, ConfigFile, Experiment, OutputFormat, Overrides, Param, Params, RunConfig, Scale, SweepSpec,
};
pub use table::{Cell, Table};
pub use validate::{cmd_validate, CheckResult, ValidateOptions, ValidationReport};

/// Process exit codes.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG_ERROR: i32 = 1;
    pub const VALIDATION_FAILURE: i32 = 2;
}

/// Worker cap from `SG_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("SG_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n: &usize| n > 0)
}
