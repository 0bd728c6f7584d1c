use std::io;

use thiserror::Error;

/// Every failure the engine can report.
///
/// Variants are split into input problems (bad data, bad arguments, an
/// estimate that cannot be identified from the data) and internal failures.
/// [`Error::is_validation`] tells them apart; the CLI maps that onto its exit
/// codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("unknown input format `{0}` (expected csv or jsonl)")]
    UnknownFormat(String),

    #[error("input is not valid UTF-8: {0}")]
    Encoding(String),

    #[error("malformed header: {0}")]
    Header(String),

    #[error("corrupt input: {rejected} of {total} rows rejected (threshold {threshold})")]
    CorruptInput {
        rejected: usize,
        total: usize,
        threshold: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no skills above threshold (min_projects = {0})")]
    NoSkillsAboveThreshold(usize),

    #[error("empty graph")]
    EmptyGraph,

    #[error("unknown skill `{0}`")]
    UnknownSkill(String),

    #[error("skill `{0}` occurs in every project, no complement set")]
    NoComplementSet(String),

    #[error("price of `{0}` is unidentifiable (skill dummy is collinear with the controls)")]
    PriceUnidentifiable(String),

    #[error("insufficient observations: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("degenerate test: {0}")]
    DegenerateTest(String),

    #[error("partition does not cover node `{0}`")]
    PartitionMissingNode(String),

    #[error("missing value for node `{0}`")]
    MissingValue(String),

    #[error("occupation `{0}` missing from automation table")]
    UnknownOccupation(String),

    #[error("fold {fold} of {k} is too small to fit: {reason}")]
    FoldTooSmall { fold: usize, k: usize, reason: String },

    #[error("empty bundle")]
    EmptyBundle,

    #[error("unknown skill `{slug}`")]
    UnknownSlug { slug: String, suggestions: Vec<String> },

    #[error("artifact: {0}")]
    Artifact(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the error stems from user input rather than from a bug or
    /// an environment failure.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_) | Error::Csv(_))
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::UnknownFormat(_) => "unknown_format",
            Error::Encoding(_) => "encoding",
            Error::Header(_) => "malformed_header",
            Error::CorruptInput { .. } => "corrupt_input",
            Error::Config(_) => "invalid_config",
            Error::NoSkillsAboveThreshold(_) => "no_skills_above_threshold",
            Error::EmptyGraph => "empty_graph",
            Error::UnknownSkill(_) => "unknown_skill",
            Error::NoComplementSet(_) => "no_complement_set",
            Error::PriceUnidentifiable(_) => "price_unidentifiable",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Dimension(_) => "dimension_mismatch",
            Error::UndefinedCorrelation(_) => "undefined_correlation",
            Error::DegenerateTest(_) => "degenerate_test",
            Error::PartitionMissingNode(_) => "partition_missing_node",
            Error::MissingValue(_) => "missing_value",
            Error::UnknownOccupation(_) => "unknown_occupation",
            Error::FoldTooSmall { .. } => "fold_too_small",
            Error::EmptyBundle => "empty_bundle",
            Error::UnknownSlug { .. } => "unknown_slug",
            Error::Artifact(_) => "artifact",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
