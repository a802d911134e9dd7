use std::path::PathBuf;

use thiserror::Error;

use crate::damping::{DampingError, EvalError, ParseError};
use crate::fractional::FractionalError;
use crate::lyapunov::LyapunovError;
use crate::partition::PartitionError;
use crate::spectrum::SpectrumError;

/// Any failure surfaced by the library or the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation error: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Damping(#[from] DampingError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Fractional(#[from] FractionalError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
