//! Experiment orchestration for the obstacle laboratory: configuration,
//! sweeps, invariant checks and byte-stable reports.

pub mod config;
pub mod report;
pub mod run;
pub mod verify;

use thiserror::Error;

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] obstacle_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl LabError {
    /// 1 invariant violation, 2 solver failure, 3 invalid configuration.
    pub fn exit_code(&self) -> i32 {
        use obstacle_core::Error as E;
        match self {
            Self::Invariant(_) => 1,
            Self::Core(E::NonConverged { .. } | E::Singular(_)) => 2,
            Self::Core(_) | Self::Config(_) | Self::Io(_) => 3,
        }
    }
}
