use std::path::PathBuf;

use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rating {rating} is outside the scale 0..={level_count}")]
    RatingOutOfScale { rating: u32, level_count: u32 },

    #[error("no rating for factor `{0}`")]
    MissingRating(String),

    #[error("no sampled value for influence {0}")]
    MissingDraw(String),

    #[error("unknown factor `{0}`")]
    UnknownFactor(String),

    #[error("model is invalid: {}", join_violations(.0))]
    InvalidModel(Vec<Violation>),

    #[error("uniform variate {0} is outside [0, 1]")]
    UniformOutOfRange(f64),

    #[error("sample count must be at least 1")]
    EmptyPlan,

    #[error("distribution has no samples")]
    EmptyDistribution,

    #[error("probability {0} is outside (0, 1]")]
    ProbabilityOutOfRange(f64),

    #[error("need at least {needed} projects, got {got}")]
    InsufficientProjects { needed: usize, got: usize },

    #[error("project `{id}`: {reason}")]
    InvalidProject { id: String, reason: String },

    #[error("regression is degenerate: sum of squared adjusted sizes is zero")]
    DegenerateRegression,

    #[error("cost overhead {0} implies non-positive effort")]
    NonPositiveEffort(f64),

    #[error("nominal productivity must be positive, got {0}")]
    NonPositiveProductivity(f64),

    #[error("effort scope is empty after harmonization")]
    EmptyScope,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn join_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
