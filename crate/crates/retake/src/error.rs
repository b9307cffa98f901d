//! One error type for the whole crate, with a coarse input/processing split
//! that the CLI maps onto exit codes.

use thiserror::Error;

/// Everything that can go wrong across the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed dictionary line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("no pronunciation for '{0}'")]
    MissingPronunciation(String),
    #[error("transcript schema: {0}")]
    SchemaError(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("transcript carries no phone information")]
    NoPhones,
    #[error("bad logit header: {0}")]
    BadHeader(String),
    #[error("logit payload size mismatch: expected {expected} bytes, got {actual}")]
    SizeMismatch { expected: u64, actual: u64 },
    #[error("unknown phone label '{0}'")]
    UnknownPhone(String),
    #[error("non-finite score at frame {frame}, class {class}")]
    NonFiniteScore { frame: usize, class: usize },
    #[error("transcript has no word tier")]
    NoWordTier,
    #[error("method not applicable: {0}")]
    NotApplicable(String),
    #[error("unsupported wav format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt wav header: {0}")]
    CorruptHeader(String),
    #[error("span out of range: {0}")]
    SpanOutOfRange(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("sample rate mismatch: expected {expected} Hz, got {actual} Hz")]
    SampleRateMismatch { expected: u32, actual: u32 },
    #[error("no donor segment for token '{0}'")]
    MissingDonor(String),
    #[error("crossfade too long: {0}")]
    CrossfadeTooLong(String),
    #[error("utterance has no words")]
    EmptyUtterance,
    #[error("reference sequence is empty")]
    EmptyReference,
    #[error("no matched phones between the transcripts")]
    NoMatchedPhones,
    #[error("signal too short for analysis")]
    TooShort,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Whether an error blames the inputs or the processing of valid inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable, unparseable, or invalid inputs (CLI exit code 2).
    Input,
    /// Failures while operating on inputs that parsed cleanly (CLI exit code 3).
    Processing,
}

impl Error {
    /// Coarse classification used for CLI exit codes.
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            MissingDonor(_) | CrossfadeTooLong(_) | EmptyUtterance | EmptyReference
            | NoMatchedPhones | TooShort | SampleRateMismatch { .. } => ErrorKind::Processing,
            _ => ErrorKind::Input,
        }
    }

    /// Stable machine-readable name for the error variant.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            MalformedLine { .. } => "malformed_line",
            MissingPronunciation(_) => "missing_pronunciation",
            SchemaError(_) => "schema_error",
            InvariantViolation(_) => "invariant_violation",
            NoPhones => "no_phones",
            BadHeader(_) => "bad_header",
            SizeMismatch { .. } => "size_mismatch",
            UnknownPhone(_) => "unknown_phone",
            NonFiniteScore { .. } => "non_finite_score",
            NoWordTier => "no_word_tier",
            NotApplicable(_) => "not_applicable",
            UnsupportedFormat(_) => "unsupported_format",
            CorruptHeader(_) => "corrupt_header",
            SpanOutOfRange(_) => "span_out_of_range",
            InvalidConfig(_) => "invalid_config",
            InvalidPlan(_) => "invalid_plan",
            Manifest(_) => "manifest",
            SampleRateMismatch { .. } => "sample_rate_mismatch",
            MissingDonor(_) => "missing_donor",
            CrossfadeTooLong(_) => "crossfade_too_long",
            EmptyUtterance => "empty_utterance",
            EmptyReference => "empty_reference",
            NoMatchedPhones => "no_matched_phones",
            TooShort => "too_short",
            Io(_) => "io",
            Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
