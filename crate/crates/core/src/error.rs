use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QkdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("Gram matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    InfeasibleGram { min_eigenvalue: f64 },

    #[error(
        "state set spans only {rank} of {dim} dimensions; square-root measurement is degenerate"
    )]
    DegenerateDiscrimination { rank: usize, dim: usize },

    #[error("state is not normalized (norm {norm})")]
    Unnormalized { norm: f64 },

    #[error("negative probability {value:.3e} for outcome ({a}, {b})")]
    NegativeProbability { a: usize, b: usize, value: f64 },

    #[error("record {index} was not measured with the key settings (3, 3)")]
    NonKeyRecord { index: usize },
}

pub type Result<T> = std::result::Result<T, QkdError>;
