use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate concept id `{0}`")]
    DuplicateConcept(String),

    #[error("concept `{0}` has no embedding row")]
    MissingEmbedding(String),

    #[error("embedding for `{id}` has dimension {found}, expected {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("zero-norm vector{}", .0.as_deref().map(|id| format!(" for `{id}`")).unwrap_or_default())]
    ZeroNorm(Option<String>),

    #[error("unknown concept id `{0}`")]
    UnknownConcept(String),

    #[error("negative frequency {value} for `{surface}`/`{concept}`")]
    NegativeFrequency {
        surface: String,
        concept: String,
        value: f64,
    },

    #[error("duplicate lexicon entry (`{surface}`, `{concept}`)")]
    DuplicateEntry { surface: String, concept: String },

    #[error("inconsistent rows for form `{surface}`: {message}")]
    InconsistentForm { surface: String, message: String },

    #[error("form `{0}` cannot be resolved against the lexicon")]
    UnresolvableForm(String),

    #[error("concept `{0}` is labeled more than once in the encoding")]
    DuplicateEncodingConcept(String),

    #[error("invalid encoding item for `{concept}`: {message}")]
    InvalidEncodingItem { concept: String, message: String },

    #[error("all joint weights are zero")]
    ZeroWeights,

    #[error("the lexicon has no forms")]
    EmptyLexicon,

    #[error("no near-synonym candidates remain for `{0}` after filtering")]
    EmptyCandidates(String),

    #[error("concept set of the encoding does not match the frontier")]
    ConceptSetMismatch,

    #[error("taxonomy contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("`{0}` and `{1}` share no common ancestor")]
    NoCommonAncestor(String, String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown configuration key `{0}`")]
    UnknownConfigKey(String),

    #[error("configuration `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Whether the error comes from malformed inputs or configuration rather
    /// than from a failure while running.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_validation(),
            Error::Parse { .. }
            | Error::DuplicateConcept(_)
            | Error::MissingEmbedding(_)
            | Error::DimensionMismatch { .. }
            | Error::ZeroNorm(_)
            | Error::UnknownConcept(_)
            | Error::NegativeFrequency { .. }
            | Error::DuplicateEntry { .. }
            | Error::InconsistentForm { .. }
            | Error::UnresolvableForm(_)
            | Error::DuplicateEncodingConcept(_)
            | Error::InvalidEncodingItem { .. }
            | Error::Cycle(_)
            | Error::UnknownConfigKey(_)
            | Error::Config { .. } => true,
            _ => false,
        }
    }

    /// Tags an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}
