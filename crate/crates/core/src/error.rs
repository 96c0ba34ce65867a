use thiserror::Error;

/// Errors raised by the planners, the engine and the geometry helpers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverageError {
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),
    #[error("point ({x:.6}, {y:.6}) lies outside the ground rectangle")]
    OutOfDomain { x: f64, y: f64 },
    #[error("could not place {count} buildings at density {density:.3} after {attempts} attempts")]
    Placement {
        count: usize,
        density: f64,
        attempts: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("building {index} needs cruise altitude {required:.3} m above the ceiling {ceiling:.3} m")]
    CeilingTooLow {
        index: usize,
        required: f64,
        ceiling: f64,
    },
    #[error("point ({x:.6}, {y:.6}) is inside an obstacle")]
    InsideObstacle { x: f64, y: f64 },
    #[error("environment has no free space")]
    NoFreeSpace,
    #[error("density is not normalized: integral {0:.12}")]
    Unnormalized(f64),
    #[error("time {t} precedes the last recorded time {last}")]
    NonMonotoneTime { t: f64, last: f64 },
    #[error("no probes to report on")]
    NoProbes,
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<CoverageError>,
    },
}

impl CoverageError {
    pub fn context(self, context: impl Into<String>) -> Self {
        CoverageError::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoverageError>;
