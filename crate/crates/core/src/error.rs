use thiserror::Error;

/// Errors produced by dataset ingestion and the scoring pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv parse error: {0}")]
    Csv(String),

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("duplicate column name '{0}' in header")]
    DuplicateColumn(String),

    #[error("column name must be non-empty (column {0})")]
    EmptyColumnName(usize),

    #[error("unknown column '{0}'")]
    UnknownColumn(String),

    #[error("feature index {index} out of range for {n_features} features")]
    FeatureOutOfRange { index: usize, n_features: usize },

    #[error("feature subset must be non-empty")]
    EmptySubset,

    #[error("feature {0} is already a member of the subset")]
    FeatureInSubset(usize),

    #[error("non-finite value at position {0} in numeric column")]
    NonFiniteValue(usize),

    #[error("cannot parse '{value}' as a number in column '{column}' (row {row})")]
    NotNumeric {
        column: String,
        row: usize,
        value: String,
    },

    #[error(
        "exact Shapley computation refused for {n_features} features (limit {limit}); \
         use the bounded or sampled estimator"
    )]
    ExactLimitExceeded { n_features: usize, limit: usize },

    #[error("column lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("redundancy rate needs at least 2 selected features, got {0}")]
    TooFewSelected(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("synthetic generation failed planted-structure verification after {0} seeds")]
    PlantedStructureViolation(u32),
}

pub type Result<T> = std::result::Result<T, Error>;
