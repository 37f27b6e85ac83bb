use thiserror::Error;

/// Errors raised while building, solving or post-processing a PDCP.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdcpError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("grid construction failed: {0}")]
    GridConstruction(String),

    #[error("singular matrix: zero pivot at row {row}")]
    SingularMatrix { row: usize },

    #[error("BiCGSTAB breakdown after {iterations} iterations (relative residual {residual:e})")]
    Breakdown { iterations: usize, residual: f64 },

    #[error("linear solve did not converge: {iterations} iterations, relative residual {residual:e}")]
    LinearNotConverged { iterations: usize, residual: f64 },

    #[error("penalty iteration did not converge within {max_iters} passes (stage {stage})")]
    PenaltyNotConverged { max_iters: usize, stage: usize },

    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<PdcpError>,
    },

    #[error("pole of the stability function at z = {0}")]
    Pole(String),

    #[error("region of interest contains no grid node")]
    EmptyRoi,

    #[error("order fit needs at least 3 usable points, got {0}")]
    TooFewPoints(usize),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for PdcpError {
    fn from(e: std::io::Error) -> Self {
        PdcpError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PdcpError>;
