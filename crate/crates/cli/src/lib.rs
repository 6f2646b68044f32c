//! Scenario configuration, experiment orchestration and exports for the
//! fractured-vuggy multiscale flow solver.

pub mod config;
pub mod export;
pub mod report;
pub mod scenario;

pub use config::{ConfigError, ScenarioConfig};
pub use report::{compare, l2_relative_error, ErrorReport};
pub use scenario::{run_mode, Mode, ModeRun, SimSetup};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Geometry(#[from] fracflow_core::geometry::GeometryError),
    #[error(transparent)]
    Physics(#[from] fracflow_core::physics::PhysicsError),
    #[error(transparent)]
    Assembly(#[from] fracflow_core::assembly::AssemblyError),
    #[error(transparent)]
    Linalg(#[from] fracflow_core::linalg::LinalgError),
    #[error(transparent)]
    Multiscale(#[from] fracflow_core::multiscale::MultiscaleError),
    #[error(transparent)]
    Timestep(#[from] fracflow_core::timestepper::TimestepError),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    /// 1 for configuration/input problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_)
            | CliError::Io(_)
            | CliError::Geometry(_)
            | CliError::Physics(_)
            | CliError::Assembly(_) => 1,
            CliError::Numerical(_)
            | CliError::Linalg(_)
            | CliError::Multiscale(_)
            | CliError::Timestep(_) => 2,
        }
    }
}

/// Read and validate a scenario file.
pub fn load_config(path: &str) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {path}: {e}")))?;
    config::ScenarioConfig::from_json_str(&text).map_err(CliError::from)
}
