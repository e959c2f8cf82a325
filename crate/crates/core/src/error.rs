use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Incompatible matrix/vector dimensions.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A computation produced an infinity or NaN.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// An operation that requires full-rank input received a rank-deficient one.
    #[error("rank deficient: {0}")]
    RankDeficient(String),

    /// Input size exceeds a hard combinatorial guard.
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// A tolerance-aware comparison could not be decided either way.
    #[error("indeterminate comparison: {0}")]
    Indeterminate(String),

    /// Input was (numerically) zero where a nonzero value is required.
    #[error("zero input: {0}")]
    ZeroInput(String),

    /// A stated hypothesis of a bound does not hold for the given arguments.
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// The requested combination is outside what this operation covers.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Key document carries a format version this build does not read.
    #[error("version mismatch: document version {found}, supported {supported}")]
    VersionMismatch { found: u32, supported: u32 },

    /// Key or graph document failed to parse or validate.
    #[error("malformed document: {0}")]
    MalformedDocument(String),

    /// Invalid argument combination.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Failure on one element of a batch, tagged with its index.
    #[error("batch item {index}: {source}")]
    BatchItem {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
