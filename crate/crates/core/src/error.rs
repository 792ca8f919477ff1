use thiserror::Error;

/// Errors raised by the model, the policies and the numeric oracles.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid scenario parameters: {0}")]
    InvalidParams(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("malformed departure profile: {0}")]
    MalformedProfile(String),

    #[error("value {value} outside the admissible range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("perceived budget {requested} outside [0, {max}]")]
    InfeasiblePerceivedBudget { requested: f64, max: f64 },

    #[error("budget {requested} exceeds the budget {required} that removes congestion entirely")]
    OverBudget { requested: f64, required: f64 },

    #[error("bracket [{lo}, {hi}] with values [{f_lo}, {f_hi}] does not contain target {target}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        target: f64,
    },

    #[error("map is not monotone at {at} (value {value} outside [{f_lo}, {f_hi}])")]
    NonMonotone {
        at: f64,
        value: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("bisection stopped after {iterations} iterations with residual {residual}")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl ModelError {
    /// True for failures of the numeric machinery (bracketing, monotonicity,
    /// convergence) as opposed to bad inputs.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(
            self,
            ModelError::Bracket { .. }
                | ModelError::NonMonotone { .. }
                | ModelError::NoConvergence { .. }
        )
    }
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
