use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("dimension k = {k} exceeds the supported maximum {max}")]
    DimensionTooLarge { k: usize, max: usize },

    #[error("unknown simplex label {0}")]
    UnknownLabel(usize),

    #[error("cap {cap} is below the minimal degree k + 1 = {min}")]
    CapTooSmall { cap: u32, min: u32 },

    #[error("time index {requested} is beyond the simulated horizon {available}")]
    BeyondHorizon { requested: usize, available: usize },

    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("tail-measure box touches the origin: the measure is infinite there")]
    DivergentBox,

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("all expected mass pooled into a single cell")]
    DegeneratePooling,

    #[error("non-positive value {0} in the top order statistics")]
    NonPositiveSample(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown validation suite '{0}'")]
    UnknownSuite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
