use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid tangent vector: deviation {deviation:e} exceeds tolerance")]
    InvalidTangent { deviation: f64 },

    #[error("logarithm undefined: {reason}")]
    LogUndefined { reason: String },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("points are antipodal; rotation is not unique")]
    AntipodalPair,

    #[error("matrix is not skew-symmetric (deviation {deviation:e})")]
    NotSkew { deviation: f64 },

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:e})")]
    NoConvergence { iterations: usize, gradient_norm: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("number of components {k} out of range 0..={max}")]
    KOutOfRange { k: usize, max: usize },

    #[error("total variance is zero; FVE is undefined")]
    ZeroVariance,

    #[error("gamma {0} must lie strictly between 0 and 1")]
    GammaOutOfRange(f64),

    #[error("no observation within bandwidth of evaluation time {t}")]
    EmptyKernelWindow { t: f64 },

    #[error("row {row} has zero sum")]
    ZeroRowSum { row: usize },

    #[error("coordinate {value:e} at row {row}, column {column} is negative")]
    NegativeCoordinate { row: usize, column: usize, value: f64 },

    #[error("latitude {0} outside [-90, 90]")]
    LatitudeOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("subject {id} at t={t}: point is off the manifold (deviation {deviation:e})")]
    OffManifold { id: String, t: f64, deviation: f64 },

    #[error("at time index {index}: {source}")]
    AtTime { index: usize, source: Box<Error> },

    #[error("at subject {subject}, time index {index}: {source}")]
    AtSubject { subject: usize, index: usize, source: Box<Error> },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at_time(self, index: usize) -> Self {
        Error::AtTime { index, source: Box::new(self) }
    }

    pub fn at_subject(self, subject: usize, index: usize) -> Self {
        Error::AtSubject { subject, index, source: Box::new(self) }
    }

    /// The innermost error, with positional context stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtTime { source, .. } | Error::AtSubject { source, .. } => source.root(),
            other => other,
        }
    }

    /// Short variant name, stable for machine parsing.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidTangent { .. } => "InvalidTangent",
            Error::LogUndefined { .. } => "LogUndefined",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::AntipodalPair => "AntipodalPair",
            Error::NotSkew { .. } => "NotSkew",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::GridMismatch(_) => "GridMismatch",
            Error::KOutOfRange { .. } => "KOutOfRange",
            Error::ZeroVariance => "ZeroVariance",
            Error::GammaOutOfRange(_) => "GammaOutOfRange",
            Error::EmptyKernelWindow { .. } => "EmptyKernelWindow",
            Error::ZeroRowSum { .. } => "ZeroRowSum",
            Error::NegativeCoordinate { .. } => "NegativeCoordinate",
            Error::LatitudeOutOfRange(_) => "LatitudeOutOfRange",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Parse { .. } => "ParseError",
            Error::OffManifold { .. } => "OffManifold",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
            Error::AtTime { .. } | Error::AtSubject { .. } => unreachable!(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self.root() {
            Error::NoConvergence { .. }
            | Error::LogUndefined { .. }
            | Error::ZeroVariance
            | Error::DegenerateInput(_)
            | Error::AntipodalPair => ErrorClass::Numerical,
            Error::Io(_) => ErrorClass::Io,
            Error::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => ErrorClass::Io,
            _ => ErrorClass::Validation,
        }
    }
}
