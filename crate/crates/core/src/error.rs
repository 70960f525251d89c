use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("real root of a negative number ({0}) is undefined; take the norm first")]
    NegativeRadicand(f64),
    #[error("root order must be at least 1")]
    ZeroRootOrder,
    #[error("projective class undefined for the zero tuple")]
    ZeroTuple,
    #[error("tuple length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("point {point:?} lies outside the chart bounds on axis `{axis}`")]
    OutOfBounds { point: Vec<f64>, axis: String },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("malformed index tuple {0:?}")]
    BadIndex(Vec<usize>),
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("metric has upper indices but no auxiliary lowering tensor")]
    MissingLowering,
    #[error("operation requires rank {required}, tensor has rank {found}")]
    RankMismatch { required: String, found: String },

    #[error("singular Jacobian at {0:?}")]
    SingularJacobian(Vec<f64>),
    #[error("coordinate map failed: {0}")]
    MapFailure(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("parameter `{name}`: {msg}")]
    BadParameter { name: String, msg: String },

    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error("partition of unity rejected: {0}")]
    PartitionOfUnity(String),
    #[error("warp function must be positive, got {value} at {point:?}")]
    NonPositiveWarp { value: f64, point: Vec<f64> },
    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("probability must lie in (0, 1], got {0}")]
    BadProbability(f64),
    #[error("density is negative ({value}) at {at}")]
    NegativeDensity { value: f64, at: f64 },
    #[error("standard deviation must be positive, got {0}")]
    BadSigma(f64),
    #[error("entropy map is not strictly monotone on the time bounds: {0}")]
    NotMonotone(String),

    #[error("{0}")]
    Json(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
