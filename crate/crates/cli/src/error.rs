use gnq::entropy::EntropyError;
use gnq::ldoa::LdoaError;
use gnq::model::ModelError;
use gnq::statevector::SimError;
use gnq::trotter::TrotterError;
use gnq::circuit::CircuitError;
use thiserror::Error;

/// Everything a subcommand can fail with, sorted by the exit code it maps to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Io(_) | CliError::Runtime(_) => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

const GENERATION_ONLY: &str = "circuit generation still works at this size: try `gnq stats` or `gnq dump-circuit`";

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<TrotterError> for CliError {
    fn from(e: TrotterError) -> Self {
        match e {
            TrotterError::LdoaTooWide(_) => CliError::Resource(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::TooWide { .. } => CliError::Resource(format!("{e}; {GENERATION_ONLY}")),
            SimError::NoConvergence(_) => CliError::Runtime(e.to_string()),
            SimError::Model(m) => m.into(),
            SimError::Trotter(t) => t.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<LdoaError> for CliError {
    fn from(e: LdoaError) -> Self {
        match e {
            LdoaError::TooWide(_) => CliError::Resource(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<EntropyError> for CliError {
    fn from(e: EntropyError) -> Self {
        match e {
            EntropyError::TooLarge(_) => CliError::Resource(e.to_string()),
            EntropyError::BadRdm(_) | EntropyError::Unnormalized(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
