use thiserror::Error;

/// Errors raised while evaluating a function at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("expected a point of arity {expected}, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("point {point:?} is not a node of the tabulated grid")]
    OffGrid { point: Vec<f64> },
    #[error("point {point:?} lies outside the domain: {reason}")]
    Domain { point: Vec<f64>, reason: String },
    #[error("non-finite value produced at {point:?}")]
    NonFinite { point: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("variable x{index} out of range for arity {arity} (position {pos})")]
    VariableOutOfRange { pos: usize, index: usize, arity: usize },
    #[error("function `{name}` expects {expected} argument(s), got {got}")]
    ArityMismatch { name: String, expected: usize, got: usize },
    #[error("axis {axis}: nodes {first} and {second} coincide (value {value})")]
    DuplicateNode { axis: usize, first: usize, second: usize, value: f64 },
    #[error("axis {axis}: expected {expected} nodes, got {got}")]
    WrongLength { axis: usize, expected: usize, got: usize },
    #[error("axis {axis}: node {value} lies outside ({lo}, {hi})")]
    OutsideInterval { axis: usize, value: f64, lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
