use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::rational::format_rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// One problem found by [`crate::model::validate_parameters`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParameterViolation {
    Shape(String),
    Negative { entry: String, value: BigRational },
    ForbiddenNonzero { entry: String, value: BigRational },
    /// `deficit` is `1 - sum`, so a row summing to 9/10 reports 1/10.
    RowSum { row: String, sum: BigRational, deficit: BigRational },
}

impl fmt::Display for ParameterViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Self::Negative { entry, value } => {
                write!(f, "{entry} is negative ({})", format_rational(value))
            }
            Self::ForbiddenNonzero { entry, value } => {
                write!(f, "{entry} is forbidden but equals {}", format_rational(value))
            }
            Self::RowSum { row, sum, deficit } => write!(
                f,
                "{row} sums to {} (deficit {})",
                format_rational(sum),
                format_rational(deficit)
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("invalid parameters: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidParameters(Vec<ParameterViolation>),

    #[error("path {path} is not admissible: {reason}")]
    InadmissiblePath { path: String, reason: String },

    #[error("{0}")]
    WrongModelKind(&'static str),

    #[error("degenerate binomial: both monomials coincide")]
    DegenerateBinomial,

    #[error("path index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("no data: {0}")]
    EmptyData(String),

    #[error("transition row for history {history} at {} is undefined (no visits)", time_label(*.time))]
    UndefinedRow { time: Option<usize>, history: String },

    #[error(
        "probabilities are not in the homogeneous model: {history}->{next} has ratio {ratio_a} at time {time_a} but {ratio_b} at time {time_b}"
    )]
    InconsistentRatios {
        history: String,
        next: String,
        time_a: usize,
        ratio_a: String,
        time_b: usize,
        ratio_b: String,
    },

    #[error("record {record}: {message}")]
    Data { record: usize, message: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn time_label(time: Option<usize>) -> String {
    match time {
        Some(t) => format!("time {t}"),
        None => "all times".to_string(),
    }
}
