use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("{field} = {value} is out of range {range}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("unknown {field} value `{value}`")]
    UnknownValue { field: &'static str, value: String },

    #[error("duplicate experiment configuration {key}")]
    DuplicateKey { key: String },

    #[error("no language profile for `{lang}`")]
    MissingProfile { lang: String },

    #[error("min-max scaling needs at least two distinct sizes")]
    DegenerateScaling,

    #[error("corpus is empty after preprocessing")]
    EmptyCorpus,

    #[error("KL divergence undefined: token `{token}` has zero mass in the reference distribution")]
    DivergenceUndefined { token: String },

    #[error("feature {feature} unavailable for record {record}")]
    FeatureUnavailable {
        feature: &'static str,
        record: String,
    },

    #[error("underdetermined fit: {rows} rows for {cols} coefficients")]
    Underdetermined { rows: usize, cols: usize },

    #[error("scaling-law fit failed on every start (best sse {sse})")]
    FitFailure { best: Option<[f64; 3]>, sse: f64 },

    #[error("cannot split {n} rows into {k} folds")]
    FoldInfeasible { n: usize, k: usize },

    #[error("nothing left to analyse: {reason}")]
    EmptyAnalysis { reason: String },

    #[error("sample too small: need at least {needed}, got {given}")]
    SampleTooSmall { needed: usize, given: usize },

    #[error("sample has zero variance")]
    DegenerateSample,

    #[error("test not assessable: {0}")]
    TestUndefined(&'static str),

    #[error("correlation undefined for a constant input")]
    CorrelationUndefined,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid predictor: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
