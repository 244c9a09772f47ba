use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RiskError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("axiom violation: {0}")]
    AxiomViolation(String),

    #[error("brute-force cap exceeded: {what} has size {size}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(String),

    #[error("insufficient data: {message}")]
    InsufficientData {
        message: String,
        earliest_feasible: Option<NaiveDate>,
    },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("duplicate date {date} in {source_name}")]
    DuplicateDate { source_name: String, date: NaiveDate },

    #[error("non-positive price {price} on data row {row} ({date}) of {source_name}")]
    NonPositivePrice {
        source_name: String,
        row: usize,
        date: NaiveDate,
        price: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RiskError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        RiskError::InvalidInput(msg.into())
    }

    /// Short machine-readable tag used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            RiskError::InvalidInput(_) => "InvalidInput",
            RiskError::NotFound(_) => "NotFound",
            RiskError::AxiomViolation(_) => "AxiomViolation",
            RiskError::CapExceeded { .. } => "CapExceeded",
            RiskError::DegenerateDenominator(_) => "DegenerateDenominator",
            RiskError::InsufficientData { .. } => "InsufficientData",
            RiskError::Alignment(_) => "AlignmentError",
            RiskError::Parse(_) => "Parse",
            RiskError::DuplicateDate { .. } => "DuplicateDate",
            RiskError::NonPositivePrice { .. } => "NonPositivePrice",
            RiskError::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, RiskError>;
