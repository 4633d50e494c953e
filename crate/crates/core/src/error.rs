use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    #[error("QR iteration did not converge within {iterations} iterations (active window ends at {index})")]
    NoConvergence { iterations: usize, index: usize },

    #[error("eigenvalue clustering is unstable: {0}")]
    ClusterAmbiguity(String),

    #[error("matrix is derogatory: eigenvalue {eigenvalue} has a zero superdiagonal entry in its block")]
    NotNonderogatory { eigenvalue: String },

    #[error("eigenvalues {first} and {second} coincide within tolerance")]
    RepeatedEigenvalue { first: String, second: String },

    #[error("vertex {index} out of range for a graph on {count} vertices")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("adding edge {0}-{1} would close a cycle")]
    CycleError(usize, usize),

    #[error("vertices {0} and {1} are not connected")]
    NotConnected(usize, usize),

    #[error("vertices {0} and {1} are already connected")]
    AlreadyConnected(usize, usize),

    #[error("bad union ratio {0}")]
    BadRatio(String),

    #[error("block has no entry above the zero threshold")]
    AllZero,

    #[error("cross-component block ({0}, {1}) is not zero")]
    NonzeroCrossBlock(usize, usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("word length {0} exceeds the supported maximum of 8")]
    LengthTooLarge(usize),

    #[error("non-finite value in input")]
    NonFinite,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),
}

impl Error {
    /// True for failures caused by the input violating a mathematical
    /// precondition of the canonicalization (as opposed to malformed input).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::NotSquare { .. }
                | Error::NoConvergence { .. }
                | Error::ClusterAmbiguity(_)
                | Error::NotNonderogatory { .. }
                | Error::RepeatedEigenvalue { .. }
                | Error::ShapeMismatch(_)
                | Error::NonFinite
                | Error::SingularMatrix
        )
    }
}
