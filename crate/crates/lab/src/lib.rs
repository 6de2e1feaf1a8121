//! Batch experiments on top of `qplab-core`: configuration, instances, reports and file formats.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod experiments;
pub mod instance;
pub mod io;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] qplab_core::Error),
}
