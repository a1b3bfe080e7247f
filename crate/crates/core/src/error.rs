use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate triangle {index} (signed area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("{0}")]
    Domain(String),

    #[error("polynomial degree {degree} exceeds the supported maximum {max}")]
    Degree { degree: usize, max: usize },

    #[error("Bernstein forms live on different triangles")]
    TriangleMismatch,

    #[error("negative element potential {value:e} on triangle {index}")]
    NegativePotential { index: usize, value: f64 },

    #[error("factorization breakdown at pivot {pivot} (shift {shift:e})")]
    Factorization { pivot: usize, shift: f64 },

    #[error("eigensolver did not converge after {rounds} rounds; residuals {residuals:?}")]
    NoConvergence { rounds: usize, residuals: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
