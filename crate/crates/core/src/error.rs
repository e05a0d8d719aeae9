use thiserror::Error;

/// Errors raised by the simulation engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("client shard is empty")]
    EmptyShard,
    #[error("dataset is empty")]
    EmptyData,
    #[error("bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("count mismatch: {images} images vs {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("truncated file: {0}")]
    TruncatedFile(String),
    #[error("too few samples: {samples} samples for {clients} clients")]
    TooFewSamples { samples: usize, clients: usize },
    #[error("trigger coordinate {index} out of bounds for {len} features")]
    OutOfBounds { index: usize, len: usize },
    #[error("pattern of {size} pixels cannot be split into {parts} parts")]
    PatternTooSmall { size: usize, parts: usize },
    #[error("too few clients: {got} (need at least {need})")]
    TooFewClients { got: usize, need: usize },
    #[error("every client was excluded in round {0}")]
    AllExcluded(usize),
    #[error("client {0} has no history entry")]
    HistoryMismatch(u32),
    #[error("no attackers to assign")]
    NoAttackers,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
