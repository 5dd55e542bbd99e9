use thiserror::Error;

/// Errors raised by the lattice, norm and family layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("mode {mode:?} lies outside the box |n_i| <= {n_max}")]
    ModeOutOfBox { mode: [i32; 2], n_max: i32 },
    #[error("column at {mode:?} does not fit the tau window (start {start}, len {len}, samples {samples})")]
    ColumnOutOfWindow {
        mode: [i32; 2],
        start: usize,
        len: usize,
        samples: usize,
    },
    #[error("non-finite coefficient at mode {0:?}")]
    NonFinite([i32; 2]),
    #[error("{0} is not a dyadic integer")]
    NotDyadic(u64),
    #[error("dyadic block {block} exceeds the grid diameter {diameter}")]
    BlockTooLarge { block: u64, diameter: u64 },
    #[error("family support escapes the grid: {0}")]
    SupportEscape(String),
    #[error("empty time window")]
    EmptyWindow,
    #[error("time window [{0}, {1}] exceeds the half period pi/tau_step")]
    WindowTooLong(f64, f64),
    #[error("spatial data shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least {needed} N values for a slope fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("field dump: {0}")]
    Dump(String),
}

pub type Result<T> = std::result::Result<T, Error>;
