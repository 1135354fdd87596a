//! Synchronized iterative approval voting: discrete and continuous polling
//! dynamics, random cultures, and entropy of winner sequences.

pub mod chaos;
pub mod cpd;
pub mod culture;
pub mod entropy;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod pd;
pub mod social;
pub mod strategy;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use model::{
    is_sincere, outcome_from_tally, sincere_ballots, strict_prefers, tally, Ballot, Candidate, CandidateSet,
    Electorate, Outcome, Preference, Tally, VoterType, MAX_CANDIDATES,
};
pub use strategy::{leader_rule, modified_leader_rule, StrategyTag};
