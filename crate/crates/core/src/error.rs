//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {msg}")]
    Parse {
        file: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("net {net} references unknown cell '{cell}'")]
    UnknownCell { net: String, cell: String },

    #[error("macro '{name}' has zero area ({width} x {height})")]
    ZeroAreaMacro {
        name: String,
        width: f64,
        height: f64,
    },

    #[error("canvas has non-positive extent ({width} x {height})")]
    BadCanvas { width: f64, height: f64 },

    #[error("macro '{name}' missing from placement file")]
    MissingMacro { name: String },

    #[error("anchor ({i}, {j}) is invalid here: {reason}")]
    InvalidAnchor { i: usize, j: usize, reason: String },

    #[error("placement is infeasible: {0}")]
    Infeasible(String),

    #[error("genotype has {got} coordinates, expected {expected}")]
    GenotypeLength { expected: usize, got: usize },

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("{op} mutation needs at least {needed} macros, design has {got}")]
    MutationArity {
        op: &'static str,
        needed: usize,
        got: usize,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }
}
