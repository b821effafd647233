use thiserror::Error;

use crate::coefficients::ValidationReport;
use crate::spectral::Rank;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("size mismatch: expected {expected} values, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("expected a {expected} field, found {found}")]
    WrongRank { expected: Rank, found: Rank },

    #[error("incompatible operand ranks {left} and {right} for {op}")]
    IncompatibleRanks {
        left: Rank,
        right: Rank,
        op: &'static str,
    },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("negative-order operator applied to a field with nonzero mean (|mean| = {mean:e})")]
    NonzeroMean { mean: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown model preset `{name}`; valid presets: {valid}")]
    UnknownPreset { name: String, valid: String },

    #[error("coefficient constraints violated: {0}")]
    Constraints(ValidationReport),

    #[error("lambda1 = {lambda1} must be strictly negative")]
    Lambda1NotNegative { lambda1: f64 },

    #[error("blow-up detected at t = {t} (step {step}): {reason}")]
    BlowUp { t: f64, step: usize, reason: String },
}
