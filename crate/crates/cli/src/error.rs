use std::path::Path;

use medge_core::ffc::FfcError;
use medge_core::sae::SaeError;
use medge_core::signal::SignalError;
use medge_core::sim::SimError;
use medge_core::spectral::SpectralError;
use medge_core::wire::WireError;

/// Command failure, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
    Protocol(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Protocol(_) => 4,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage error", m),
            CliError::Data(m) => ("data error", m),
            CliError::Numerical(m) => ("numerical failure", m),
            CliError::Protocol(m) => ("protocol error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<SignalError> for CliError {
    fn from(e: SignalError) -> Self {
        match e {
            SignalError::InvalidParameter(_) | SignalError::WindowTooLong { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::InvalidBand { .. } | SpectralError::EmptyBand { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<FfcError> for CliError {
    fn from(e: FfcError) -> Self {
        match e {
            FfcError::InvalidParameter(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SaeError> for CliError {
    fn from(e: SaeError) -> Self {
        match e {
            SaeError::Divergence { .. } | SaeError::NonFiniteParameter(_) => CliError::Numerical(e.to_string()),
            SaeError::Format(_) | SaeError::DimensionMismatch { .. } | SaeError::ZeroReference => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<WireError> for CliError {
    fn from(e: WireError) -> Self {
        CliError::Protocol(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Spectral(e) => e.into(),
            SimError::Sae(e) => e.into(),
            SimError::Wire(_)
            | SimError::Stream(_)
            | SimError::MissingDecoder { .. }
            | SimError::FingerprintMismatch { .. } => CliError::Protocol(e.to_string()),
            SimError::Config(_) | SimError::ZeroPower => CliError::Usage(e.to_string()),
            SimError::TruthMismatch { .. } | SimError::Io(_) => CliError::Data(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(format!("JSON: {e}"))
    }
}
