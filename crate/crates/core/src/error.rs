use thiserror::Error;

pub type Result<T> = std::result::Result<T, GsisError>;

#[derive(Error, Debug)]
pub enum GsisError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {vertex} has zero degree; the normalized Laplacian is undefined")]
    DegenerateGraph { vertex: usize },

    #[error("invalid circulant generator {q} for order {n}: generators must satisfy 1 <= q < n/2")]
    InvalidGenerator { q: usize, n: usize },

    #[error("shifts do not commute (max commutator norm {residual:.3e} > {tol:.3e})")]
    NotCommutative { residual: f64, tol: f64 },

    #[error("simultaneous diagonalization failed after {attempts} attempts (worst residual {worst_residual:.3e})")]
    DiagonalizationFailed { attempts: usize, worst_residual: f64 },

    #[error("matrix is not diagonalized by the decomposition basis (off-diagonal residual {residual:.3e})")]
    NotDiagonalized { residual: f64 },

    #[error("index {index} out of range for size {size}")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("signal is identically zero")]
    ZeroSignal,

    #[error("joint spectrum repeats on the requested frequency set (frequencies {first} and {second})")]
    RepeatedSpectrum { first: usize, second: usize },

    #[error("size limit exceeded: {what} supports at most {limit}, got {actual}")]
    SizeLimit { what: &'static str, limit: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("sampling is not injective on the space (Gram condition number {condition:.3e})")]
    NonInjectiveSampling { condition: f64 },

    #[error("sampling inner product is degenerate on a candidate direction (relative sampled norm {relative_norm:.3e})")]
    DegenerateInnerProduct { relative_norm: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("CSV error at row {row}, column {column}: {message}")]
    CsvCell { row: usize, column: String, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
