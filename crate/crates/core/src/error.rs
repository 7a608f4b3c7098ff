use std::path::PathBuf;

/// Errors produced by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid material: lambda={lambda}, mu={mu}, rho={rho}")]
    InvalidMaterial { lambda: f64, mu: f64, rho: f64 },

    #[error("invalid axis index {0} (expected 1, 2 or 3)")]
    InvalidAxis(usize),

    #[error("eigenvector matrix is degenerate at alpha = {alpha}")]
    DegenerateEigenspace { alpha: f64 },

    #[error("linearized Riemann problem is not diagonalizable (residual {residual:e})")]
    NumericalDegeneracy { residual: f64 },

    #[error("unsupported polynomial degree {0} (supported: 0..=9)")]
    UnsupportedDegree(usize),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("NODATA value encountered at raster sample ({col}, {row})")]
    NoData { col: usize, row: usize },

    #[error("query point ({x}, {y}) lies outside the raster extent")]
    OutOfExtent { x: f64, y: f64 },

    #[error("point {0:?} lies outside the computational domain")]
    OutsideDomain([f64; 2]),

    #[error("space-time predictor did not converge in cell {cell}")]
    PredictorDivergence { cell: usize },

    #[error("non-finite value in cell {cell} at step {step}")]
    NonFinite { cell: usize, step: usize },

    #[error("no cell carries a positive signal speed")]
    NoSignal,

    #[error("invalid refinement setting: {0}")]
    InvalidRefinement(String),

    #[error("face level jump of {0} exceeds 1")]
    LevelJump(usize),

    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
