//! Error type shared by all pipeline stages.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Wraps an error with the name of the pipeline stage that produced it.
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid suffix rule: {0}")]
    InvalidRule(String),

    #[error("min_stem must be at least 1 (empty stems would merge unrelated words)")]
    MinStemZero,

    #[error("term-by-document matrix is empty: no term survived counting")]
    EmptyMatrix,

    #[error("entropy weighting undefined for a single-document collection")]
    EntropySingleDocument,

    #[error("invalid dimensionality k = {k}: {reason}")]
    BadDimension { k: usize, reason: String },

    #[error("undefined similarity: empty pseudo-document")]
    UndefinedSimilarity,

    #[error("question unanswerable: no corpus terms in any answer")]
    NoCorpusTerms,

    #[error("missing choice frequency for question {question} answer {answer}")]
    MissingFrequency { question: String, answer: usize },

    #[error("undefined correlation: zero variance on the {side} side")]
    ZeroVariance { side: &'static str },

    #[error("space file: {0}")]
    SpaceFile(String),
}

impl Error {
    /// Tags `self` with a pipeline stage name, e.g. `err.at_stage("vsm")`.
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
