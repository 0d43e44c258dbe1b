use std::fmt;

use thiserror::Error;

use crate::af::Witness;

/// A diagnostic for malformed input, with an optional source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl ParseError {
    pub fn invalid(message: impl Into<String>) -> ParseError {
        ParseError { message: message.into(), line: None, column: None }
    }

    pub fn at(message: impl Into<String>, line: usize, column: usize) -> ParseError {
        ParseError { message: message.into(), line: Some(line), column: Some(column) }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ParseError {}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> ParseError {
        let text = e.to_string();
        // The reader appends its own position; keep it in the fields only.
        let message = text.rsplit_once(" at line ").map_or(text.as_str(), |(m, _)| m);
        ParseError::at(message, e.line(), e.column())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {element:?} lies outside the declared window (box {bound})")]
    OutOfWindow { element: Vec<i64>, bound: i64 },
    #[error("the zero element carries no value")]
    ZeroElement,
    #[error("map is undefined on attained value {0}")]
    PartialMap(String),
    #[error("window too shallow: {0}")]
    WindowTooShallow(String),
    #[error("function is not invariant: f({n} * {a:?}) != f({a:?})")]
    InvarianceFailure { n: i64, a: Vec<i64> },
    #[error("a rank-2 restriction is not AF: {0:?}")]
    Rank2Failure(Box<Witness>),
    #[error("basis condition f(a) = f(a+b) != f(b) fails")]
    BasisConditionFailure,
    #[error("hypothesis fails: {0}")]
    HypothesisFailure(String),
    #[error("not a c-pair: {0}")]
    NotACPair(String),
    #[error("value ring not supported: {0}")]
    RingUnsupported(String),
    #[error("budget exceeded: {needed} instances > budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("basis is linearly dependent over the constants")]
    DependentBasis,
    #[error("order construction hit an unhandled separator configuration: {0}")]
    UnhandledConfiguration(String),
    #[error("valuation axiom failure: {0}")]
    AxiomFailure(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
