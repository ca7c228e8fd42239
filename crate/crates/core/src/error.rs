use alloc::string::String;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("constant target")]
    ConstantTarget,
    #[error("missing column: {0}")]
    MissingColumn(String),
    #[error("too few usable rows: {0}")]
    TooFewRows(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("control points must have strictly increasing y")]
    NonIncreasingControlPoints,
    #[error("relevance value {0} outside [0, 1]")]
    RelevanceOutOfRange(f64),
    #[error("nothing to under-sample: no normal cases")]
    NoNormalCases,
    #[error("no rare cases to over-sample")]
    NoRareCases,
    #[error("need at least {needed} rare cases, found {found}")]
    TooFewRareCases { needed: usize, found: usize },
    #[error("all sampling weights are zero")]
    ZeroWeights,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("feature width mismatch: model expects {expected}, got {found}")]
    SchemaMismatch { expected: usize, found: usize },
    #[error("learner kind {0} cannot be used for this task")]
    WrongLearnerKind(&'static str),
    #[error("model is not a classifier")]
    NotAClassifier,
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("meta-dataset needs at least {needed} rows, found {found}")]
    TooFewMetaRows { needed: usize, found: usize },
    #[error("every dataset in the corpus failed")]
    AllDatasetsFailed,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
