use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("eigensolver did not converge within its iteration budget")]
    FailedConvergence,

    #[error("SVD did not converge")]
    SvdFailure,

    #[error("generated graph has an isolated vertex after {attempts} attempts")]
    DegenerateGraph { attempts: usize },

    #[error("observation matrix has zero Frobenius norm")]
    ZeroSignal,

    #[error("sparsity {k} out of range 1..={n}")]
    SparsityOutOfRange { k: usize, n: usize },

    #[error("assembled adjacency entry {value} below validity floor -1e-6")]
    ValidityViolation { value: f64 },

    #[error("linear program numerical failure: {0}")]
    NumericalFailure(String),

    #[error("recovery infeasible: least constraint violation {residual}")]
    Infeasible { residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
