// SPDX-License-Identifier: MIT

use std::path::PathBuf;

use confsel::{AdjustmentError, ExpansionError, OracleError, ParseError, TranscriptError};
use thiserror::Error;

use crate::exit;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{}: {source}", path.display(), source.line())]
    Graph { path: PathBuf, source: ParseError },
    #[error("{}: {source}", path.display())]
    Transcript {
        path: PathBuf,
        source: TranscriptError,
    },
    #[error(transparent)]
    Adjustment(#[from] AdjustmentError),
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
    #[error("session aborted before completion")]
    Aborted,
    #[error("{0}")]
    Server(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            _ => exit::FAILURE,
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        CliError::Expansion(ExpansionError::Oracle(e))
    }
}
