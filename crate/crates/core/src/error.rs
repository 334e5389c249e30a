use std::fmt;

use thiserror::Error;

/// Where a sampled matrix came from, so a failing draw can be replayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub sample: u64,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seed={} sample={}", self.seed, self.sample)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid locality: k={k} with n={n}")]
    InvalidLocality { n: usize, k: usize },

    #[error("invalid local term: {0}")]
    InvalidTerm(String),

    #[error("invalid inverse temperature {0} (must be finite and >= 0)")]
    InvalidTemperature(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("numeric failure: {message}{}", .provenance.map(|p| format!(" ({p})")).unwrap_or_default())]
    NumericFailure {
        message: String,
        provenance: Option<Provenance>,
    },

    #[error("capacity exceeded: D={dim}, t={t} gives D^t above the cap of {cap}")]
    Capacity { dim: usize, t: usize, cap: usize },

    #[error("missing purities: {0}")]
    MissingPurities(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error(
        "epsilon={epsilon} not reached for beta in [0, {beta_max}] (bound there is {bound_at_max})"
    )]
    Unreachable {
        epsilon: f64,
        beta_max: f64,
        bound_at_max: f64,
    },

    #[error("unsupported ensemble: {0}")]
    UnsupportedEnsemble(String),

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numeric(message: impl Into<String>) -> Self {
        Error::NumericFailure {
            message: message.into(),
            provenance: None,
        }
    }

    /// Attaches sampling provenance to a numeric failure; other variants pass through.
    pub fn with_provenance(self, provenance: Provenance) -> Self {
        match self {
            Error::NumericFailure { message, .. } => Error::NumericFailure {
                message,
                provenance: Some(provenance),
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
