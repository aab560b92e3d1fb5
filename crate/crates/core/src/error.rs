use std::path::PathBuf;

use thiserror::Error;

/// Errors reported by the multicomplex engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("order {0} is out of range (supported: {1})")]
    OrderOutOfRange(u32, &'static str),
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: u32, right: u32 },
    #[error("coefficient count {got} does not match 2^{order} = {expected}")]
    CoefficientCount { order: u32, got: usize, expected: usize },
    #[error("non-finite coefficient at index {0}")]
    NonFinite(usize),
    #[error("unit mask {mask} is not valid for order {order}")]
    InvalidMask { mask: u32, order: u32 },
    #[error("slice units must be pairwise distinct (got masks {0:?})")]
    DuplicateUnits([u32; 3]),
    #[error("power must be at least {min} (got {got})")]
    PowerOutOfRange { got: u32, min: u32 },
    #[error("exponent must be at least 1 (got {0})")]
    ExponentOutOfRange(u32),
    #[error("max_iter must be in 1..={max} (got {got})")]
    IterationsOutOfRange { got: u32, max: u32 },
    #[error("parameter c has non-real components; slice classification requires a real c")]
    NonRealParameter,
    #[error("slices belong to different classes ({src} vs {dst})")]
    ClassMismatch { src: String, dst: String },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid of {voxels} voxels exceeds the memory budget of {budget} bytes")]
    MemoryBudget { voxels: u128, budget: usize },
    #[error("malformed unit name {0:?} (expected 1, i1..i4, j1..j3 or a mask integer)")]
    UnitName(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
