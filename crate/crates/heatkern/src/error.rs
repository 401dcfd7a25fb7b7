//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// The two points are joined by more than one minimizing geodesic.
    #[error("cut pair: d(x,y) = {distance} reaches the cut locus (inj = {inj})")]
    CutPair { distance: f64, inj: f64 },

    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),

    #[error("grid resolution must be at least 4, got {0}")]
    ResolutionTooSmall(usize),

    /// Correction coefficients beyond the supported order were requested.
    #[error("coefficient order {requested} unsupported (max {max} for this model/operator)")]
    OrderUnsupported { requested: usize, max: usize },

    /// Riesz moment check outside the classical (j >= 1) regime.
    #[error("unsupported Riesz order j = {0}; only j >= 1 is a classical integral in dimension 1")]
    UnsupportedOrder(usize),

    #[error("spectral tail criterion unreachable within {max_terms} terms (t = {t} too small for the configured budget)")]
    TruncationNotConverged { t: f64, max_terms: usize },

    #[error("kernel matrices live on different grids")]
    GridMismatch,

    #[error("need at least 3 meshes to fit a convergence order, got {0}")]
    InsufficientPoints(usize),

    #[error("invalid time order: require 0 <= s0 < s1 <= t, got s0 = {s0}, s1 = {s1}, t = {t}")]
    BadTimeOrder { s0: f64, s1: f64, t: f64 },

    #[error("quadrature did not stabilize: node-doubling still changes the result by {last_change:e}")]
    QuadratureNotConverged { last_change: f64 },

    #[error("tensor quadrature over {0} manifold factors exceeds the supported limit")]
    DimensionTooLarge(usize),

    #[error("degenerate Hessian: found {found} zero modes, expected {expected}")]
    DegenerateHessian { found: usize, expected: usize },

    #[error("negative normal-Hessian eigenvalue {0}: critical set is not a minimum")]
    NegativeEigenvalue(f64),

    #[error("partition too coarse: a minimizing geodesic has a hop of length {hop} (limit {limit})")]
    PartitionTooCoarse { hop: f64, limit: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("operator {op} is not defined on model {model}")]
    OperatorModelMismatch { op: String, model: String },

    /// Two independent reference routes disagree beyond tolerance.
    #[error("oracle mismatch: {context} differ by {diff:e}")]
    OracleMismatch { context: String, diff: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
