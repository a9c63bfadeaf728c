//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong when building or running a check.
///
/// Verdict-valued operations (identity checks, symmetry checks, ...) do not
/// use this type to report a *failed* check: a violated inequality is data,
/// not an error. `Error` covers contract violations (dimension mismatches,
/// missing preconditions) and resource refusals.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite coordinate {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("absolute norm requires dimension 1, got {got}")]
    AbsoluteNormDim { got: usize },

    #[error("p-norm requires p >= 1, got {p}")]
    InvalidPNorm { p: f64 },

    #[error("sign vector entries must be +1 or -1 (entry {index} is {value})")]
    InvalidSign { index: usize, value: i8 },

    #[error("kernel arity mismatch: kernel order {order}, got {got} arguments")]
    KernelArity { order: usize, got: usize },

    #[error("kernel index {index} out of range for n = {n}")]
    KernelIndexRange { index: usize, n: usize },

    #[error("kernel domain error: {0}")]
    KernelDomain(String),

    #[error("kernel order must be {expected} for this operation, got {got}")]
    KernelOrder { expected: usize, got: usize },

    #[error("sample block has {got} copies, operation needs {expected}")]
    CopyCount { expected: usize, got: usize },

    #[error("sample rows have mismatched lengths: {a} vs {b}")]
    RowLength { a: usize, b: usize },

    #[error("invalid finite support: {0}")]
    InvalidSupport(String),

    #[error("distribution is not finite-support; use the Monte Carlo engine instead")]
    NotFiniteSupport,

    #[error("distribution must have mean zero (max |mean coordinate| = {max_abs_mean})")]
    NonZeroMean { max_abs_mean: f64 },

    #[error(
        "enumeration cap exceeded: instance needs {needed} outcomes, cap is {cap}; \
         raise the cap or use the Monte Carlo engine"
    )]
    CapExceeded { needed: u128, cap: u128 },

    #[error("kernel failed the permutation-symmetry hypothesis: {0}")]
    SymmetryRequired(String),

    #[error("kernel evaluation failed at tuple {tuple:?}: {source}")]
    KernelEval {
        tuple: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
