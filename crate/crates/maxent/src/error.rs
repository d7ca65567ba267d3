//! Shared error type for the whole toolkit.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, MaxentError>;

/// All failure modes surfaced by the library.
///
/// Variants are grouped by origin: input/contract violations (mapped to CLI
/// exit code 1) and numerical failures (mapped to exit code 2).
#[derive(Debug, Error)]
pub enum MaxentError {
    // --- input / contract violations -------------------------------------
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("non-positive price at line {line}: {value}")]
    NonPositivePrice { line: usize, value: f64 },
    #[error("timestamps not strictly increasing at line {line}")]
    NonMonotoneTimestamp { line: usize },
    #[error("no common timestamps remain after synchronization")]
    EmptyIntersection,
    #[error("tables are not synchronized: {0}")]
    UnsynchronizedInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty sample")]
    EmptySample,
    #[error("empty observable series")]
    EmptySeries,
    #[error("system size {n} exceeds the exact-enumeration limit {limit}")]
    SizeLimitExceeded { n: usize, limit: usize },
    #[error("distribution support must lie within the reference support (mass {mass:.3e} escapes)")]
    AbsoluteContinuityViolation { mass: f64 },
    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),
    #[error("S_1 - S_N below tolerance: multi-information criterion undefined for independent data")]
    DegenerateDenominator,
    #[error("mean |q_{index}| saturated at +-1: atanh diverges")]
    SaturatedMean { index: usize },
    #[error("covariance matrix numerically singular (condition estimate {condition:.3e})")]
    SingularCovariance { condition: f64 },
    #[error("insufficient sample: {0}")]
    InsufficientSample(String),
    #[error("power-law test needs support size >= {needed}, got {got}")]
    InsufficientSupport { needed: usize, got: usize },
    #[error("entropy-utility relation needs >= 3 distinct probability levels, got {got}")]
    InsufficientLevels { got: usize },
    #[error("row {index} has zero variance")]
    ZeroVariance { index: usize },
    #[error("correlation entry ({i},{j}) = {value} outside [-1, 1]")]
    OutOfRangeCorrelation { i: usize, j: usize, value: f64 },
    #[error("influence matrix degenerate: no nonzero off-diagonal entry")]
    DegenerateInfluence,
    #[error("window width {width} exceeds panel length {m}")]
    WindowTooLarge { width: usize, m: usize },
    #[error("history length {got} does not match model lag count {expected}")]
    LagMismatch { expected: usize, got: usize },
    #[error("no positive events: true-positive rate undefined")]
    NoPositives,
    #[error("no negative events: false-positive rate undefined")]
    NoNegatives,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),

    // --- numerical failures ----------------------------------------------
    #[error("optimizer failed to converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("infeasible covariance for dichotomized Gaussian at entries {entries:?}")]
    InfeasibleCovariance { entries: Vec<(usize, usize)> },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

impl MaxentError {
    /// CLI exit code contract: 1 for validation errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            MaxentError::NonConvergence { .. }
            | MaxentError::InfeasibleCovariance { .. }
            | MaxentError::SingularCovariance { .. }
            | MaxentError::NumericalFailure(_) => 2,
            _ => 1,
        }
    }
}
