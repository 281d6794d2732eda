use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed scenario or policy document.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// Well-formed document that violates a scenario invariant.
    #[error("invalid scenario: {0}")]
    Semantic(String),

    #[error("workspace has no free cells")]
    EmptyWorkspace,

    #[error("goal is unreachable: {0}")]
    UnreachableGoal(String),

    #[error("point {point:?} lies outside the workspace")]
    OutOfWorkspace { point: Vec<f64> },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("edge costs must be strictly positive for label-setting (found {0})")]
    NonPositiveEdgeCost(f64),

    #[error("policy was generated for scenario {found}, expected {expected}")]
    PolicyMismatch { expected: String, found: String },

    #[error("invalid policy document: {0}")]
    PolicyFormat(String),

    #[error("non-finite state at t = {t}")]
    NumericFailure { t: f64 },

    #[error("no finite-value primitive available at box {cell} (t = {t})")]
    Stuck { t: f64, cell: CellDisplay },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn syntax(err: &serde_json::Error) -> Self {
        Error::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

/// Box index vector rendered as `(i, j, ...)` in error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellDisplay(pub Vec<usize>);

impl fmt::Display for CellDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
