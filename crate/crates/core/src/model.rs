//! Candidates, preferences with ties, approval ballots, electorates and the
//! approval tally.
//!
//! Candidates are small integer handles into a [`CandidateSet`]; the set's
//! declaration order doubles as the tie-break order of every tally.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::strategy::StrategyTag;

/// Upper bound imposed by the bitmask representation of [`Ballot`].
pub const MAX_CANDIDATES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Candidate(usize);

impl Candidate {
    pub const fn new(index: usize) -> Self {
        Candidate(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    names: Vec<String>,
}

impl CandidateSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::NoCandidates);
        }
        if names.len() > MAX_CANDIDATES {
            return Err(Error::TooManyCandidates {
                got: names.len(),
                max: MAX_CANDIDATES,
            });
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateCandidate(name.clone()));
            }
        }
        Ok(CandidateSet { names })
    }

    /// `a`, `b`, `c`, ... in alphabetic (and therefore tie-break) order.
    pub fn alphabetic(n: usize) -> Result<Self> {
        if n > 26 {
            return Self::new((0..n).map(|i| format!("c{i}")));
        }
        Self::new((0..n).map(|i| ((b'a' + i as u8) as char).to_string()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, c: Candidate) -> &str {
        &self.names[c.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<Candidate> {
        self.names.iter().position(|n| n == name).map(Candidate)
    }

    pub fn lookup(&self, name: &str) -> Result<Candidate> {
        self.get(name).ok_or_else(|| Error::UnknownCandidate(name.to_string()))
    }

    pub fn contains(&self, c: Candidate) -> bool {
        c.0 < self.names.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = Candidate> + '_ {
        (0..self.names.len()).map(Candidate)
    }

    /// Renders a sequence of candidates as a word, e.g. `ba`.
    pub fn word(&self, cs: impl IntoIterator<Item = Candidate>) -> String {
        cs.into_iter().map(|c| self.name(c)).collect()
    }

    pub(crate) fn check(&self, c: Candidate) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::UnknownCandidate(format!("#{}", c.0)))
        }
    }
}

/// A weak order: ordered tie-groups covering every candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preference {
    groups: Vec<Vec<Candidate>>,
    // group index of each candidate
    rank: Vec<usize>,
}

impl Preference {
    pub fn from_groups(n_candidates: usize, groups: Vec<Vec<Candidate>>) -> Result<Self> {
        let mut rank = vec![usize::MAX; n_candidates];
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::EmptyGroup);
            }
            for &c in group {
                if c.0 >= n_candidates {
                    return Err(Error::UnknownCandidate(format!("#{}", c.0)));
                }
                if rank[c.0] != usize::MAX {
                    return Err(Error::RepeatedCandidate(format!("#{}", c.0)));
                }
                rank[c.0] = g;
            }
        }
        let missing: Vec<String> = rank
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == usize::MAX)
            .map(|(i, _)| format!("#{i}"))
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompletePreference(missing));
        }
        Ok(Preference { groups, rank })
    }

    /// A tie-free preference, most preferred first.
    pub fn linear(n_candidates: usize, order: &[Candidate]) -> Result<Self> {
        Self::from_groups(n_candidates, order.iter().map(|&c| vec![c]).collect())
    }

    /// Parses the compact notation `a(bc)d`; only single-character names.
    pub fn parse_compact(set: &CandidateSet, text: &str) -> Result<Self> {
        let mut groups = Vec::new();
        let mut chars = text.chars();
        while let Some(ch) = chars.next() {
            if ch == '(' {
                let mut group = Vec::new();
                for inner in chars.by_ref() {
                    if inner == ')' {
                        break;
                    }
                    group.push(set.lookup(&inner.to_string())?);
                }
                groups.push(group);
            } else if !ch.is_whitespace() {
                groups.push(vec![set.lookup(&ch.to_string())?]);
            }
        }
        Self::from_groups(set.len(), groups).map_err(|e| match e {
            Error::RepeatedCandidate(_) | Error::IncompletePreference(_) => {
                Error::invalid(format!("invalid preference `{text}`: {e}"))
            }
            other => other,
        })
    }

    pub fn groups(&self) -> &[Vec<Candidate>] {
        &self.groups
    }

    pub fn n_candidates(&self) -> usize {
        self.rank.len()
    }

    /// Index of the tie-group holding `c` (0 = most preferred).
    pub fn group_of(&self, c: Candidate) -> usize {
        self.rank[c.0]
    }

    pub fn is_tie_free(&self) -> bool {
        self.groups.iter().all(|g| g.len() == 1)
    }

    pub fn last_group(&self) -> &[Candidate] {
        self.groups.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub(crate) fn prefers(&self, a: Candidate, b: Candidate) -> bool {
        self.rank[a.0] < self.rank[b.0]
    }

    /// Renders in the compact notation, e.g. `a(bc)d`.
    pub fn display(&self, set: &CandidateSet) -> String {
        let mut out = String::new();
        for group in &self.groups {
            if group.len() == 1 {
                out.push_str(set.name(group[0]));
            } else {
                out.push('(');
                out.push_str(&set.word(group.iter().copied()));
                out.push(')');
            }
        }
        out
    }
}

/// `α >_π β`: strict preference, `false` when tied.
pub fn strict_prefers(pref: &Preference, a: Candidate, b: Candidate) -> Result<bool> {
    for c in [a, b] {
        if c.0 >= pref.n_candidates() {
            return Err(Error::UnknownCandidate(format!("#{}", c.0)));
        }
    }
    Ok(pref.prefers(a, b))
}

/// An approval ballot stored as a candidate bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ballot(u64);

impl Ballot {
    pub const EMPTY: Ballot = Ballot(0);

    pub fn from_candidates(cs: impl IntoIterator<Item = Candidate>) -> Self {
        let mut b = Ballot::EMPTY;
        for c in cs {
            b.insert(c);
        }
        b
    }

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            Ballot(u64::MAX)
        } else {
            Ballot((1u64 << n) - 1)
        }
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn insert(&mut self, c: Candidate) {
        self.0 |= 1 << c.0;
    }

    pub fn contains(self, c: Candidate) -> bool {
        self.0 >> c.0 & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Empty or full ballots carry no information in approval voting.
    pub fn is_degenerate(self, n_candidates: usize) -> bool {
        self.is_empty() || self == Ballot::full(n_candidates)
    }

    pub fn iter(self) -> impl Iterator<Item = Candidate> {
        let bits = self.0;
        (0..64).filter(move |i| bits >> i & 1 == 1).map(Candidate)
    }

    pub fn display(self, set: &CandidateSet) -> String {
        let names: Vec<&str> = self.iter().map(|c| set.name(c)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// True iff every approved candidate is strictly preferred to every
/// non-approved one.
pub fn is_sincere(pref: &Preference, ballot: Ballot) -> bool {
    let n = pref.n_candidates();
    let mut worst_in = None;
    let mut best_out = None;
    for i in 0..n {
        let c = Candidate(i);
        let r = pref.group_of(c);
        if ballot.contains(c) {
            worst_in = Some(worst_in.map_or(r, |w: usize| w.max(r)));
        } else {
            best_out = Some(best_out.map_or(r, |b: usize| b.min(r)));
        }
    }
    match (worst_in, best_out) {
        (Some(w), Some(b)) => w < b,
        _ => true,
    }
}

/// Every prefix-union of tie-groups, from the empty ballot to the full one.
pub fn sincere_ballots(pref: &Preference) -> Vec<Ballot> {
    let mut out = Vec::with_capacity(pref.groups().len() + 1);
    let mut acc = Ballot::EMPTY;
    out.push(acc);
    for group in pref.groups() {
        for &c in group {
            acc.insert(c);
        }
        out.push(acc);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoterType {
    pub name: String,
    pub preference: Preference,
    pub weight: f64,
    pub strategy: StrategyTag,
}

impl VoterType {
    pub fn new(name: impl Into<String>, preference: Preference, weight: f64, strategy: StrategyTag) -> Self {
        VoterType {
            name: name.into(),
            preference,
            weight,
            strategy,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Electorate {
    candidates: CandidateSet,
    types: Vec<VoterType>,
    total_weight: f64,
}

impl Electorate {
    pub fn new(candidates: CandidateSet, types: Vec<VoterType>) -> Result<Self> {
        let mut names = HashSet::new();
        let mut total = 0.0;
        for t in &types {
            if !names.insert(t.name.as_str()) {
                return Err(Error::DuplicateType(t.name.clone()));
            }
            if !(t.weight.is_finite() && t.weight >= 0.0) {
                return Err(Error::InvalidWeight {
                    name: t.name.clone(),
                    weight: t.weight,
                });
            }
            if t.preference.n_candidates() != candidates.len() {
                return Err(Error::DimensionMismatch(t.preference.n_candidates(), candidates.len()));
            }
            if t.strategy == StrategyTag::LeaderRule && !t.preference.is_tie_free() {
                return Err(Error::TiedLeaderRule(t.name.clone()));
            }
            total += t.weight;
        }
        if total.is_nan() || total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(Electorate {
            candidates,
            types,
            total_weight: total,
        })
    }

    /// Builds from `(name, compact preference, weight)` triples, all sharing
    /// one strategy.
    pub fn from_compact(candidates: CandidateSet, strategy: StrategyTag, types: &[(&str, &str, f64)]) -> Result<Self> {
        let types = types
            .iter()
            .map(|&(name, pref, w)| {
                Ok(VoterType::new(
                    name,
                    Preference::parse_compact(&candidates, pref)?,
                    w,
                    strategy,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Electorate::new(candidates, types)
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn types(&self) -> &[VoterType] {
        &self.types
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.types.iter().position(|t| t.name == name)
    }
}

/// Approval score of each candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct Tally {
    scores: Vec<f64>,
}

impl Tally {
    pub fn new(scores: Vec<f64>) -> Self {
        Tally { scores }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, c: Candidate) -> f64 {
        self.scores[c.0]
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn display(&self, set: &CandidateSet) -> String {
        set.iter()
            .map(|c| format!("{}:{}", set.name(c), self.score(c)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `assignment[i]` is the ballot cast by voter type `i`.
pub fn tally(electorate: &Electorate, assignment: &[Ballot]) -> Result<Tally> {
    if assignment.len() != electorate.types.len() {
        return Err(Error::MissingAssignment {
            expected: electorate.types.len(),
            got: assignment.len(),
        });
    }
    let mut scores = vec![0.0; electorate.n_candidates()];
    for (t, ballot) in electorate.types.iter().zip(assignment) {
        for c in ballot.iter() {
            electorate.candidates.check(c)?;
            scores[c.0] += t.weight;
        }
    }
    Ok(Tally { scores })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    scores: Tally,
    ranking: Vec<Candidate>,
}

impl Outcome {
    pub fn scores(&self) -> &Tally {
        &self.scores
    }

    pub fn ranking(&self) -> &[Candidate] {
        &self.ranking
    }

    pub fn winner(&self) -> Candidate {
        self.ranking[0]
    }

    pub fn runner_up(&self) -> Candidate {
        self.ranking[1]
    }

    /// Smallest score gap between any two candidates.
    pub fn min_margin(&self) -> f64 {
        self.ranking
            .windows(2)
            .map(|w| self.scores.score(w[0]) - self.scores.score(w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Ranks by descending score; exact ties go to the earlier-declared
/// candidate.
pub fn outcome_from_tally(t: Tally) -> Result<Outcome> {
    if t.len() < 2 {
        return Err(Error::TooFewCandidates(t.len()));
    }
    let mut ranking: Vec<Candidate> = (0..t.len()).map(Candidate).collect();
    ranking.sort_by(|&a, &b| {
        t.score(b)
            .partial_cmp(&t.score(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(Outcome { scores: t, ranking })
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
