use thiserror::Error;

/// Errors raised by the simulation, learning and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty position list")]
    EmptyPositions,

    #[error("degenerate geometry: {0}")]
    Geometry(String),

    #[error("degenerate array: sphere integral of the pattern is zero")]
    DegenerateArray,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("forward cache does not belong to these parameters")]
    StaleCache,

    #[error("area too dense: could not place {n} UAVs with separation {d_min} m after {attempts} attempts")]
    AreaTooDense { n: usize, d_min: f64, attempts: usize },

    #[error("layout does not fit in the flight area: {0}")]
    LayoutOutOfBounds(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the error stems from user-provided configuration.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
