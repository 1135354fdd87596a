//! Sincere, consistent, simple strategies: an expected (winner, runner-up)
//! pair goes in, a ballot comes out.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Ballot, Candidate, Outcome, Preference};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyTag {
    /// Requires a tie-free preference.
    LeaderRule,
    /// Same formula evaluated on preferences with ties.
    ModifiedLeaderRule,
}

impl StrategyTag {
    pub fn short_name(self) -> &'static str {
        match self {
            StrategyTag::LeaderRule => "lr",
            StrategyTag::ModifiedLeaderRule => "mlr",
        }
    }

    /// Ballot for the expected `(winner, runner_up)`.
    pub fn ballot(self, pref: &Preference, winner: Candidate, runner_up: Candidate) -> Result<Ballot> {
        if self == StrategyTag::LeaderRule && !pref.is_tie_free() {
            return Err(Error::invalid("the leader rule requires a preference without ties"));
        }
        Ok(leader_ballot(pref, winner, runner_up))
    }
}

impl fmt::Display for StrategyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for StrategyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(StrategyTag::LeaderRule),
            "mlr" => Ok(StrategyTag::ModifiedLeaderRule),
            _ => Err(Error::invalid(format!("unknown strategy `{s}`"))),
        }
    }
}

/// Approve everyone strictly above the expected winner, and the winner iff
/// strictly above the runner-up. Candidates tied with the winner follow the
/// winner, which keeps the ballot sincere.
pub(crate) fn leader_ballot(pref: &Preference, winner: Candidate, runner_up: Candidate) -> Ballot {
    let w = pref.group_of(winner);
    let upto = if w < pref.group_of(runner_up) { w + 1 } else { w };
    Ballot::from_candidates(pref.groups()[..upto].iter().flatten().copied())
}

pub fn leader_rule(pref: &Preference, o: &Outcome) -> Result<Ballot> {
    StrategyTag::LeaderRule.ballot(pref, o.winner(), o.runner_up())
}

pub fn modified_leader_rule(pref: &Preference, o: &Outcome) -> Ballot {
    leader_ballot(pref, o.winner(), o.runner_up())
}
