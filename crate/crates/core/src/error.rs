use thiserror::Error;

/// Errors raised across the ranking toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("instance needs at least 2 items, got {0}")]
    TooFewItems(usize),

    #[error("weight {value} of item {item} is outside (0, 1]")]
    InvalidWeight { item: usize, value: f64 },

    #[error("largest weight is {0}, expected 1 (enable normalization to rescale)")]
    NotNormalized(f64),

    #[error("subset is empty")]
    EmptySubset,

    #[error("item {item} is out of range for {n} items")]
    ItemOutOfRange { item: usize, n: usize },

    #[error("item {0} appears more than once")]
    DuplicateItem(usize),

    #[error("item {item} is not a member of the subset")]
    NotInSubset { item: usize },

    #[error("top-m width {m} is invalid for a subset of size {size}")]
    InvalidWidth { m: usize, size: usize },

    #[error("subset of size {size} is too large to enumerate (limit {limit})")]
    EnumerationTooLarge { size: usize, limit: usize },

    #[error("subset size {got} violates the protocol, expected exactly {expected}")]
    WrongSubsetSize { expected: usize, got: usize },

    #[error("subset size k = {k} is invalid for {n} items")]
    InvalidSubsetSize { k: usize, n: usize },

    #[error("query budget of {0} exhausted")]
    BudgetExhausted(u64),

    #[error("query budget must be at least 1")]
    ZeroBudget,

    #[error("feedback does not match the tracked group")]
    FeedbackMismatch,

    #[error("no comparisons recorded between items {0} and {1}")]
    NoComparisons(usize, usize),

    #[error("renewal estimate is already complete")]
    AlreadyComplete,

    #[error("renewal estimate is not complete yet")]
    Incomplete,

    #[error("parameter {name} = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },

    #[error("ranking is not a permutation: {0}")]
    InvalidRanking(String),

    #[error("missing sort key for item {0}")]
    MissingKey(usize),

    #[error("unknown environment {0:?}")]
    UnknownEnvironment(String),

    #[error("no records to aggregate")]
    NoRecords,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}
