use thiserror::Error;

/// One violated invariant of a validated structure.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldViolation {
    pub field: &'static str,
    pub reason: String,
}

impl std::fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("physically inconsistent: {0}")]
    Physical(String),

    #[error("invalid configuration: {}", join(.0))]
    Validation(Vec<FieldViolation>),

    #[error("numerical instability at t = {t:e} s")]
    Instability { t: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("steady state not reached, final residual {residual:e}")]
    NotConverged { residual: f64 },

    #[error("no sign change of the phase over [{lo}, {hi}] Hz")]
    Bracket { lo: f64, hi: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("geometry error: {0}")]
    Geometry(String),
}

fn join(v: &[FieldViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl Error {
    /// Names of the offending fields for validation errors.
    pub fn fields(&self) -> Vec<&'static str> {
        match self {
            Error::Validation(v) => v.iter().map(|f| f.field).collect(),
            _ => Vec::new(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
