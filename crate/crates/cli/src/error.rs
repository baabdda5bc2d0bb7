use gridstab::coupling::CouplingError;
use gridstab::experiments::ExperimentError;
use gridstab::swing_sim::SimError;
use gridstab::{AdmittanceError, AnalysisError, GridError};
use thiserror::Error;

/// Failure of a command, carrying its process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<GridError> for CliError {
    fn from(e: GridError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            // malformed input rather than a numerical breakdown
            AnalysisError::Admittance(AdmittanceError::Disconnected)
            | AnalysisError::Coupling(CouplingError::TooFewGenerators(_)) => CliError::Parse(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::NTooLarge(_) | ExperimentError::NTooSmall { .. } => CliError::Usage(e.to_string()),
            ExperimentError::NotATree | ExperimentError::HasLoads | ExperimentError::Grid(_) => {
                CliError::Parse(e.to_string())
            }
            ExperimentError::Analysis(a) => a.into(),
            ExperimentError::Unreproducible(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
