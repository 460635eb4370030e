//! Files in and out: observation lists, experiment configs, result archives
//! and density matrices.

mod archive;
mod config;
mod data;
mod density;

use std::path::PathBuf;

use thiserror::Error;

use crate::samplers::SamplerError;
use crate::sweep::SweepError;

pub use archive::{format_number, manifest_text, write_archive};
pub use config::{ExperimentConfig, OutputOptions, RawConfig, Rescaling};
pub use data::{load_dataset, load_unit_dataset, parse_observations};
pub use density::{read_density_matrix, write_density_matrix, write_density_rows, DensityMatrix};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: cannot parse `{text}` as a number")]
    Parse {
        path: PathBuf,
        line: usize,
        text: String,
    },
    #[error("{path}: {source}")]
    Data { path: PathBuf, source: SamplerError },
    #[error("{path}: {message}")]
    Density { path: PathBuf, message: String },
    #[error("config: {0}")]
    ConfigSyntax(String),
    #[error("config: {0}")]
    BadParam(String),
    #[error("config: {0}")]
    BadModel(String),
    #[error("config: {0}")]
    BadPreset(String),
    #[error("config: {0}")]
    BadValue(String),
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

impl IoError {
    /// Machine-readable prefix for error reports.
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Read { .. } => "IO_READ",
            IoError::Write { .. } => "IO_WRITE",
            IoError::Parse { .. } => "DATA_PARSE",
            IoError::Data { source, .. } => match source {
                SamplerError::NonPositiveForLog { .. } => "DATA_LOG_NONPOSITIVE",
                SamplerError::EmptyDataset => "DATA_EMPTY",
                _ => "DATA_INVALID",
            },
            IoError::Density { .. } => "DENSITY_INVALID",
            IoError::ConfigSyntax(_) => "CONFIG_SYNTAX",
            IoError::BadParam(_) => "CONFIG_BAD_PARAM",
            IoError::BadModel(_) => "CONFIG_BAD_MODEL",
            IoError::BadPreset(_) => "CONFIG_BAD_PRESET",
            IoError::BadValue(_) => "CONFIG_BAD_VALUE",
            IoError::Sweep(SweepError::InvalidSpec(_)) => "CONFIG_BAD_VALUE",
            IoError::Sweep(SweepError::UnknownModel(_)) => "CONFIG_BAD_MODEL",
            IoError::Sweep(_) => "SWEEP_FAILED",
        }
    }

    /// True when the input, not the program, is at fault.
    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            IoError::Write { .. }
                | IoError::Sweep(SweepError::Sampler { .. } | SweepError::Measure { .. })
        )
    }
}
