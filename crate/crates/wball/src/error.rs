//! Error types shared across the crate.
//!
//! Construction errors (`Input`, `Dim`, `NonFinite`) come from validating
//! user-supplied data. `Parse` and `Eval` carry the position-tagged failures
//! of the expression language. `Contract` marks a caller violating a
//! documented precondition, and `IterationLimit` / `NoSamples` are
//! diagnostics from iterative routines that could not finish.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid input data (weights, radii, box bounds, file contents, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },

    /// A coordinate, weight or parameter is NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Expression source text could not be parsed.
    #[error(transparent)]
    Parse(#[from] ParseError),

    /// Expression evaluation hit a domain error.
    #[error(transparent)]
    Eval(#[from] EvalError),

    /// A documented precondition was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative solver hit its iteration cap before converging.
    #[error("iteration limit reached: {0}")]
    IterationLimit(String),

    /// A sampling routine discarded every sample it drew.
    #[error("no usable samples: {0}")]
    NoSamples(String),

    /// Reading or writing a file failed.
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    /// A structured document (problem file, report) failed to parse.
    #[error("file format error: {0}")]
    FileFormat(String),
}

/// Parse failure with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at offset {position}: {kind}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    /// Coordinate index outside `1..=dim`, e.g. `x3` in a 2-d problem.
    #[error("coordinate x{index} out of range for dimension {dim}")]
    CoordOutOfRange { index: usize, dim: usize },

    #[error("function `{name}` expects {expected} argument(s), got {got}")]
    Arity {
        name: String,
        expected: &'static str,
        got: usize,
    },

    #[error("numeric literal out of range")]
    NumberOutOfRange,
}

/// Domain failure while evaluating an expression at a concrete point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log of a non-positive value ({0})")]
    LogNonPositive(f64),

    #[error("square root of a negative value ({0})")]
    SqrtNegative(f64),

    #[error("division by zero")]
    DivisionByZero,

    /// Negative base with fractional exponent, or zero base with negative
    /// exponent.
    #[error("power outside the real domain: {base}^{exponent}")]
    PowDomain { base: f64, exponent: f64 },

    /// An intermediate or final value overflowed to infinity or NaN.
    #[error("evaluation produced a non-finite value")]
    NonFinite,

    #[error("point has dimension {got}, expression expects {expected}")]
    WrongDimension { expected: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
