use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("depth {depth} exceeds the configured cap {cap} (set DYMART_DEPTH_CAP to raise it)")]
    Capacity { depth: u32, cap: u32 },

    #[error("depth must be at least 1, got {0}")]
    ZeroDepth(u32),

    #[error("atom index {atom} out of range: must be < {size}")]
    AtomOutOfRange { atom: u64, size: u64 },

    #[error("coin index {coin} out of range: must satisfy 1 <= j <= {depth}")]
    CoinOutOfRange { coin: u32, depth: u32 },

    #[error("walsh mask {bits:#x} out of range for depth {depth}")]
    MaskOutOfRange { bits: u64, depth: u32 },

    #[error("filtration level {level} out of range: must satisfy 0 <= l <= {depth}")]
    LevelOutOfRange { level: u32, depth: u32 },

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("operands live on different spaces (depth {left} vs depth {right})")]
    SpaceMismatch { left: u32, right: u32 },

    #[error("expected {expected} time slices, found {found}")]
    SliceCount { expected: usize, found: usize },

    #[error("slice {time} is not measurable at level {time} (violation {violation:e})")]
    NotAdapted { time: usize, violation: f64 },

    #[error("martingale property fails at step {step} -> {next} (violation {violation:e})", next = step + 1)]
    NotMartingale { step: usize, violation: f64 },

    #[error("integrand slice {slice} is not measurable at level {slice} (violation {violation:e})")]
    NotPredictable { slice: usize, violation: f64 },

    #[error("increment indices must satisfy a < b <= c < d <= {depth}, got ({a}, {b}, {c}, {d})")]
    IncrementOrder { a: usize, b: usize, c: usize, d: usize, depth: u32 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("solver produced non-finite {what} at step {step} (t = {time}, state = {state})")]
    Solver { what: &'static str, step: usize, time: f64, state: f64 },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
