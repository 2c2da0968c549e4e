// SPDX-License-Identifier: MIT
//! Command-line front end and HTTP session service for `confsel`.
//!
//! Exit codes: 0 success (or a sufficient set for `check`), 1 runtime failure, 2 usage
//! error, 3 negative `check` verdict, 4 replay divergence.

pub mod commands;
pub mod error;
pub mod server;

pub use commands::run;
pub use error::CliError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NOT_SUFFICIENT: i32 = 3;
    pub const DIVERGED: i32 = 4;
}
