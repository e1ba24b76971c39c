use mpreal::MpError;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mp(#[from] MpError),
    #[error("integration diverged at step {step}: {source}")]
    Diverged {
        step: u64,
        #[source]
        source: MpError,
    },
    #[error("invalid integration setup: {0}")]
    InvalidSpec(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("no divergence before t_max = {t_max}: MECT beyond horizon")]
    MectBeyondHorizon { t_max: f64 },
    #[error("no interior minimum: {0}")]
    NoInteriorMinimum(String),
    #[error("{test}: sample too small, need at least {minimum} {unit}, got {got}")]
    SampleTooSmall {
        test: &'static str,
        minimum: usize,
        got: usize,
        unit: &'static str,
    },
    #[error("length error: expected {expected} bytes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("encryption failed in group {group}: {source}")]
    Group {
        group: u64,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
}

/// Problems with a serialized cipher container.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic: expected \"LZC1\", found {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0:#04x}")]
    UnsupportedVersion(u8),
    #[error("corrupt container: {0}")]
    Corrupt(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Numerical, domain, or validation failure.
    Domain,
    /// Malformed serialized input.
    Format,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Format(_) => ErrorKind::Format,
            Error::Group { source, .. } => source.kind(),
            _ => ErrorKind::Domain,
        }
    }
}
