use alloc::string::String;

pub type CoreResult<T> = Result<T, CoreError>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("no snapshots")]
    NoSnapshots,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("value out of range for {field}: {value}")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("invalid series for agent {agent}: {reason}")]
    InvalidSeries { agent: String, reason: &'static str },
    #[error("eigenvector iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("degenerate sample: {0}")]
    Degenerate(&'static str),
    #[error("group {0} is empty")]
    EmptyGroup(&'static str),
    #[error("topic count {topics} exceeds total tokens {tokens}")]
    TooManyTopics { topics: usize, tokens: usize },
    #[error("infeasible generator spec: {0}")]
    Infeasible(String),
    #[error("hashtag {0:?} is both a pro and an anti seed")]
    SeedConflict(String),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
}
