//! Command-line front end: configuration, subcommands and output writers.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod render;

use std::fmt;

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// No tiling (or the evaluated tiling) meets the constraints.
    Infeasible,
}

/// Bad user input: configuration, tiling or alphabet files.
#[derive(Debug, Clone)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub fn exit_code(result: &anyhow::Result<Status>) -> i32 {
    use tilecap_core::Error as E;
    match result {
        Ok(Status::Ok) => EXIT_OK,
        Ok(Status::Infeasible) => EXIT_INFEASIBLE,
        Err(err) => {
            let config = err.chain().any(|e| {
                e.is::<ConfigError>()
                    || matches!(
                        e.downcast_ref::<E>(),
                        Some(E::Config(_) | E::Aperture(_) | E::Shape { .. } | E::DuplicateShape(_))
                    )
            });
            if config {
                EXIT_CONFIG
            } else {
                EXIT_INTERNAL
            }
        }
    }
}
