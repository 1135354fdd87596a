use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("candidate set is empty")]
    NoCandidates,
    #[error("at most {max} candidates are supported, got {got}")]
    TooManyCandidates { got: usize, max: usize },
    #[error("duplicate candidate name `{0}`")]
    DuplicateCandidate(String),
    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("candidate `{0}` appears more than once in a preference")]
    RepeatedCandidate(String),
    #[error("preference does not rank every candidate (missing: {})", .0.join(", "))]
    IncompletePreference(Vec<String>),
    #[error("preference contains an empty tie-group")]
    EmptyGroup,
    #[error("voter type `{0}` uses the leader rule but its preference has ties")]
    TiedLeaderRule(String),
    #[error("duplicate voter type `{0}`")]
    DuplicateType(String),
    #[error("weight of voter type `{name}` must be finite and non-negative, got {weight}")]
    InvalidWeight { name: String, weight: f64 },
    #[error("total electorate weight must be positive")]
    ZeroTotalWeight,
    #[error("expected {expected} ballots, one per voter type, got {got}")]
    MissingAssignment { expected: usize, got: usize },
    #[error("an outcome needs at least two candidates, got {0}")]
    TooFewCandidates(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("genericity condition violated: {0}")]
    NotGeneric(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Electorate-file diagnostic with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unknown candidate `{0}`")]
    UnknownCandidate(String),
    #[error("candidate repeated: `{0}`")]
    RepeatedCandidate(String),
    #[error("duplicate candidate declaration `{0}`")]
    DuplicateCandidate(String),
    #[error("duplicate voter type `{0}`")]
    DuplicateType(String),
    #[error("incomplete preference, missing: {}", .0.join(", "))]
    IncompletePreference(Vec<String>),
    #[error("malformed number `{0}`")]
    MalformedNumber(String),
    #[error("negative weight `{0}`")]
    NegativeWeight(String),
    #[error("unknown strategy `{0}` (expected LR or MLR)")]
    UnknownStrategy(String),
    #[error("voter type declared before `candidates:`")]
    CandidatesNotDeclared,
    #[error("`candidates:` declared twice")]
    CandidatesRedeclared,
    #[error("leader rule requires a preference without ties")]
    TiedLeaderRule,
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("unexpected trailing input `{0}`")]
    Trailing(String),
    #[error("{0}")]
    Invalid(String),
}
