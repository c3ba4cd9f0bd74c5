//! Error types for scenario validation, metrics aggregation and I/O.

use std::path::PathBuf;

use thiserror::Error;

/// Rejections raised while building or validating a [`crate::ScenarioSpec`].
#[derive(Debug, Error)]
pub enum SpecError {
    #[error("field dimensions must be positive and finite (xm={xm}, ym={ym})")]
    InvalidField { xm: f64, ym: f64 },
    #[error("energy parameter {name} must be positive and finite (got {value})")]
    InvalidEnergyParam { name: &'static str, value: f64 },
    #[error("election weight {name} is out of range (got {value})")]
    InvalidWeight { name: &'static str, value: f64 },
    #[error("sub-threshold weights must sum to 1 (got {sum})")]
    WeightsNotNormalized { sum: f64 },
    #[error("r_thresh must lie strictly between 0 and 1 (got {value})")]
    InvalidRThresh { value: f64 },
    #[error("at least 2 nodes are required (got {num_nodes})")]
    TooFewNodes { num_nodes: u32 },
    #[error("max_rounds must be at least 1")]
    NoRounds,
    #[error("sink_speed must be finite and non-negative (got {value})")]
    InvalidSinkSpeed { value: f64 },
    #[error("config parse error: {message}")]
    ConfigParse { message: String },
}

/// Failures from metrics serialization and aggregation.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv line {line}: {message}")]
    CsvParse { line: usize, message: String },
    #[error("cannot aggregate an empty replicate set")]
    EmptyReplicates,
    #[error("replicates mix scenarios or dimensions ({first} vs {other})")]
    MixedReplicates { first: String, other: String },
}
