use thiserror::Error;

/// Errors raised by the channel, modal and capacity routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Green's function evaluated at coincident points.
    #[error("singular Green's function: observation and source points coincide")]
    Singularity,

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "ensemble too large: C({n}, {k}) = {size} subsets exceeds cap {cap}; \
         use the equal-power fast path"
    )]
    EnsembleTooLarge {
        n: usize,
        k: usize,
        size: u128,
        cap: usize,
    },

    #[error("no channel: every stream gain is zero")]
    NoChannel,

    #[error("insufficient degrees of freedom: {available} retained modes, {required} required")]
    InsufficientDof { available: usize, required: usize },

    #[error("empty pattern ensemble")]
    EmptyEnsemble,
}

impl Error {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Singularity => "singularity",
            Error::Geometry(_) => "geometry",
            Error::Input(_) => "input",
            Error::DimensionMismatch { .. } => "dimension",
            Error::EnsembleTooLarge { .. } => "ensemble_too_large",
            Error::NoChannel => "no_channel",
            Error::InsufficientDof { .. } => "insufficient_dof",
            Error::EmptyEnsemble => "empty_ensemble",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
