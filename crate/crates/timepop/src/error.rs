use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by dataset construction, parsing, splitting and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty {0} interaction sequence")]
    EmptyInput(&'static str),

    #[error("non-finite rating {rating} for user `{user}`, item `{item}`")]
    NonFiniteRating {
        user: String,
        item: String,
        rating: f64,
    },

    #[error("negative timestamp {timestamp} for user `{user}`, item `{item}`")]
    NegativeTimestamp {
        user: String,
        item: String,
        timestamp: i64,
    },

    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("invalid parse configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown user `{0}`")]
    UnknownUser(String),

    #[error("test user `{0}` missing from training data")]
    TestUserNotInTraining(String),

    #[error("no feasible split")]
    NoFeasibleSplit,

    #[error("no users satisfy the split constraints")]
    NoEvaluatedUsers,

    #[error("no candidates")]
    NoCandidates,

    #[error("non-causal timestamps: rating time {rating_time}, last activity {last_activity}, reference {t0}")]
    NonCausalTimestamps {
        t0: i64,
        last_activity: i64,
        rating_time: i64,
    },

    #[error("negative elapsed time {0}")]
    NegativeElapsed(f64),

    #[error("reference timestamp {t0} precedes latest training interaction {max_timestamp}")]
    ReferenceBeforeTraining { t0: i64, max_timestamp: i64 },

    #[error("no relevant items")]
    NoRelevantItems,

    #[error("no users left to evaluate")]
    NoUsersEvaluated,

    #[error("fewer than two paired observations")]
    NotEnoughPairs,

    #[error("degenerate sample")]
    DegenerateSample,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
