use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |H - H^dagger| = {max_asymmetry:e}")]
    NonHermitian { max_asymmetry: f64 },
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("field range is empty: need at least 2 samples and distinct end points")]
    EmptyRange,
    #[error("detuning must be nonzero")]
    ZeroDetuning,
    #[error("polarization degree undefined: both absorption probabilities vanish")]
    UndefinedPolarization,
    #[error("ground manifold is degenerate (splitting {splitting:e} GHz)")]
    DegenerateGround { splitting: f64 },
    #[error("spectrum grid is not uniform: {0}")]
    NonUniformGrid(String),
    #[error("spectrum is flat; nothing to fit")]
    FlatSpectrum,
    #[error("splitting sweep never reaches twice the minimum residual; extend the sweep range")]
    BracketingFailed,
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
