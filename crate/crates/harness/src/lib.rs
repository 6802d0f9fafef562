//! Experiment driver for weak-value tomography sweeps.

pub mod cli;
pub mod config;
pub mod ensemble;
pub mod experiments;
pub mod output;
pub mod selftest;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] wvtomo_core::Error),
    #[error("I/O error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io(_) => 1,
            Self::Numerical(_) => 2,
        }
    }
}
