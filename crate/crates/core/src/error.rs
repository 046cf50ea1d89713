use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("invalid order {order}: {reason}")]
    InvalidOrder { order: f64, reason: &'static str },

    #[error("unsupported derivative order {0}: expected a value in (0,1) or (1,2)")]
    UnsupportedOrder(f64),

    #[error("non-finite value at node {0}")]
    InvalidInput(usize),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("grid too coarse: N = {n}, at least {min} subintervals required")]
    GridTooCoarse { n: usize, min: usize },

    #[error("grid functions live on different grids")]
    IncompatibleGrids,

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("oracle out of range: |z| = {0} exceeds 50")]
    OracleOutOfRange(f64),

    #[error("oracle series at z = {0} loses too many digits to cancellation")]
    OracleCancellation(f64),

    #[error("Mittag-Leffler evaluation failed at node {node}: {source}")]
    MlAtNode { node: usize, source: Box<FracError> },

    #[error("mode {k} failed: {source}")]
    Mode { k: usize, source: Box<FracError> },

    #[error("incomplete data: {0}")]
    IncompleteData(&'static str),

    #[error("unsupported norm order {0}")]
    UnsupportedNorm(f64),

    #[error("ratio undefined for the zero function")]
    UndefinedRatio,

    #[error("spatial resolution M = {m} is below the aliasing guard 4K = {required}")]
    Resolution { m: usize, required: usize },

    #[error("point ({x}, {t}) lies outside the space-time domain")]
    OutOfDomain { x: f64, t: f64 },
}

pub type Result<T> = std::result::Result<T, FracError>;
