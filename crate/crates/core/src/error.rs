use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// Exact ties in one coordinate; ranks are undefined without tie-breaking.
    #[error("tie in {coordinate}: indices {first} and {second} share the value {value}")]
    Tie {
        coordinate: &'static str,
        first: usize,
        second: usize,
        value: f64,
    },

    #[error("transform is not strictly increasing: {0}")]
    NonMonotone(String),

    #[error("{0}")]
    Config(String),

    #[error("{test} failed at {sweep}, replication {replication}: {source}")]
    Replicate {
        test: String,
        sweep: String,
        replication: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
