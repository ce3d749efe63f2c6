use thiserror::Error;

/// Errors produced by matrix construction, model evaluation and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of operands do not conform.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An index is outside the valid range.
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    /// A file does not follow the expected structure.
    #[error("format error: {0}")]
    Format(String),

    /// The file is well formed but declares a variant we do not handle.
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    /// The file contents violate their own declaration.
    #[error("data error: {0}")]
    Data(String),

    /// A configured size cap would be exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The weight vector is incompatible with the spectrum.
    #[error("infeasible weights: {0}")]
    InfeasibleWeights(String),

    /// Leading eigenvalues are too close for the strict-gap assumption.
    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    /// Fewer reference eigenvalues than the operation needs.
    #[error("insufficient spectrum: need more than {needed} eigenvalues, got {got}")]
    InsufficientSpectrum { needed: usize, got: usize },

    /// A matrix column has no stored entries where the picking rule needs one.
    #[error("empty column pattern at column {0}")]
    EmptyPattern(usize),

    /// Invalid argument or configuration value.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An internal invariant was violated; indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
