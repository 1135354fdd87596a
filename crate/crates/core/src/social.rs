//! Pairwise majority analysis and the one-dimensional median voter.

use crate::error::{Error, Result};
use crate::model::{Candidate, Electorate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domination {
    Dominates,
    Dominated,
    Tie,
}

/// How indifferent voters count when comparing two candidates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CondorcetMode {
    /// Indifferent voters abstain.
    #[default]
    Standard,
    /// Domination needs a strict majority of the whole electorate.
    Strong,
}

/// Weight strictly preferring `a` to `b`, and `b` to `a`.
pub fn pairwise_support(e: &Electorate, a: Candidate, b: Candidate) -> (f64, f64) {
    let mut for_a = 0.0;
    let mut for_b = 0.0;
    for t in e.types() {
        let (ra, rb) = (t.preference.group_of(a), t.preference.group_of(b));
        if ra < rb {
            for_a += t.weight;
        } else if rb < ra {
            for_b += t.weight;
        }
    }
    (for_a, for_b)
}

pub fn dominates(e: &Electorate, a: Candidate, b: Candidate) -> Domination {
    dominates_with(e, a, b, CondorcetMode::Standard)
}

pub fn dominates_with(e: &Electorate, a: Candidate, b: Candidate, mode: CondorcetMode) -> Domination {
    let (for_a, for_b) = pairwise_support(e, a, b);
    match mode {
        CondorcetMode::Standard => {
            if for_a > for_b {
                Domination::Dominates
            } else if for_b > for_a {
                Domination::Dominated
            } else {
                Domination::Tie
            }
        }
        CondorcetMode::Strong => {
            let half = e.total_weight() / 2.0;
            if for_a > half {
                Domination::Dominates
            } else if for_b > half {
                Domination::Dominated
            } else {
                Domination::Tie
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CondorcetReport {
    n: usize,
    /// Row-major `n × n`; the diagonal holds `Tie`.
    domination: Vec<Domination>,
    pub condorcet_winner: Option<Candidate>,
    pub condorcet_loser: Option<Candidate>,
    /// Every candidate ranked last (possibly tied) by a strict majority.
    pub consensual_losers: Vec<Candidate>,
    pub condorcet_order: Option<Vec<Candidate>>,
}

impl CondorcetReport {
    pub fn domination(&self, a: Candidate, b: Candidate) -> Domination {
        self.domination[a.index() * self.n + b.index()]
    }

    /// The consensual loser when exactly one candidate qualifies.
    pub fn consensual_loser(&self) -> Option<Candidate> {
        match self.consensual_losers.as_slice() {
            [c] => Some(*c),
            _ => None,
        }
    }
}

pub fn condorcet_analysis(e: &Electorate) -> CondorcetReport {
    condorcet_analysis_with(e, CondorcetMode::Standard)
}

pub fn condorcet_analysis_with(e: &Electorate, mode: CondorcetMode) -> CondorcetReport {
    let n = e.n_candidates();
    let mut domination = vec![Domination::Tie; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dominates_with(e, Candidate::new(i), Candidate::new(j), mode);
            domination[i * n + j] = d;
            domination[j * n + i] = match d {
                Domination::Dominates => Domination::Dominated,
                Domination::Dominated => Domination::Dominates,
                Domination::Tie => Domination::Tie,
            };
        }
    }
    let wins = |i: usize| {
        (0..n)
            .filter(|&j| domination[i * n + j] == Domination::Dominates)
            .count()
    };
    let losses = |i: usize| {
        (0..n)
            .filter(|&j| domination[i * n + j] == Domination::Dominated)
            .count()
    };
    let condorcet_winner = (0..n).find(|&i| wins(i) == n - 1).map(Candidate::new);
    let condorcet_loser = if n > 1 {
        (0..n).find(|&i| losses(i) == n - 1).map(Candidate::new)
    } else {
        None
    };

    // A Condorcet order exists iff sorting by win count yields a chain where
    // each candidate beats everyone below.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(wins(i)));
    let is_order = order.iter().enumerate().all(|(pos, &i)| {
        order[pos + 1..]
            .iter()
            .all(|&j| domination[i * n + j] == Domination::Dominates)
    });
    let condorcet_order = is_order.then(|| order.into_iter().map(Candidate::new).collect());

    let half = e.total_weight() / 2.0;
    let consensual_losers = e
        .candidates()
        .iter()
        .filter(|&c| {
            let w: f64 = e
                .types()
                .iter()
                .filter(|t| t.preference.last_group().contains(&c))
                .map(|t| t.weight)
                .sum();
            w > half
        })
        .collect();

    CondorcetReport {
        n,
        domination,
        condorcet_winner,
        condorcet_loser,
        consensual_losers,
        condorcet_order,
    }
}

/// Positions of candidates and voter types in `[0,1]^dim`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionalModel {
    pub dim: usize,
    pub candidates: Vec<f64>,
    pub types: Vec<f64>,
}

impl PositionalModel {
    pub fn candidate(&self, i: usize) -> &[f64] {
        &self.candidates[i * self.dim..(i + 1) * self.dim]
    }

    pub fn voter_type(&self, i: usize) -> &[f64] {
        &self.types[i * self.dim..(i + 1) * self.dim]
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len() / self.dim.max(1)
    }

    pub fn n_types(&self) -> usize {
        self.types.len() / self.dim.max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedianVoter {
    pub median_type: usize,
    pub candidate: Candidate,
}

/// The median voter type of a one-dimensional model and the candidate
/// closest to it.
///
/// Requires the generic conditions: no voter type equidistant from two
/// candidates, and no split of the sorted types into two halves of exactly
/// equal weight.
pub fn median_candidate(model: &PositionalModel, e: &Electorate) -> Result<MedianVoter> {
    if model.dim != 1 {
        return Err(Error::invalid("median voter requires a one-dimensional model"));
    }
    if model.n_types() != e.types().len() {
        return Err(Error::DimensionMismatch(model.n_types(), e.types().len()));
    }
    if model.n_candidates() != e.n_candidates() {
        return Err(Error::DimensionMismatch(model.n_candidates(), e.n_candidates()));
    }
    for (t, &x) in model.types.iter().enumerate() {
        let mut d: Vec<f64> = model.candidates.iter().map(|&c| (c - x).abs()).collect();
        d.sort_by(f64::total_cmp);
        if d.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::NotGeneric(format!(
                "voter type {t} is equidistant from two candidates"
            )));
        }
    }

    let mut order: Vec<usize> = (0..model.n_types()).collect();
    order.sort_by(|&a, &b| model.types[a].total_cmp(&model.types[b]));
    let half = e.total_weight() / 2.0;
    let mut cumulative = 0.0;
    let mut median = None;
    for &t in &order {
        cumulative += e.types()[t].weight;
        if cumulative == half {
            return Err(Error::NotGeneric(
                "voter types split into two halves of equal weight".into(),
            ));
        }
        if cumulative > half {
            median = Some(t);
            break;
        }
    }
    let median_type = median.ok_or(Error::ZeroTotalWeight)?;
    let x = model.types[median_type];
    let nearest = (0..model.n_candidates())
        .min_by(|&a, &b| {
            (model.candidates[a] - x)
                .abs()
                .total_cmp(&(model.candidates[b] - x).abs())
        })
        .expect("at least one candidate");
    Ok(MedianVoter {
        median_type,
        candidate: Candidate::new(nearest),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::{CandidateSet, Preference, VoterType};
    use crate::strategy::StrategyTag;

    fn cand(e: &Electorate, n: &str) -> Candidate {
        e.candidates().lookup(n).unwrap()
    }

    #[test]
    fn three_candidate_example_dominations() {
        let e = fixtures::consensual_loser_cycle();
        let (a, b, c) = (cand(&e, "a"), cand(&e, "b"), cand(&e, "c"));
        assert_eq!(pairwise_support(&e, a, b), (103.0, 100.0));
        assert_eq!(dominates(&e, a, b), Domination::Dominates);
        assert_eq!(pairwise_support(&e, b, c), (201.0, 104.0));
        assert_eq!(dominates(&e, b, c), Domination::Dominates);
        assert_eq!(dominates(&e, c, b), Domination::Dominated);
        let r = condorcet_analysis(&e);
        assert_eq!(r.condorcet_winner, Some(a));
        assert_eq!(r.condorcet_loser, Some(c));
        assert_eq!(r.consensual_loser(), Some(c));
        assert_eq!(r.condorcet_order, Some(vec![a, b, c]));
    }

    #[test]
    fn four_candidate_example_has_majority_cycle() {
        let e = fixtures::four_candidate_cycle();
        let r = condorcet_analysis(&e);
        assert_eq!(r.condorcet_winner, Some(cand(&e, "a")));
        assert_eq!(r.condorcet_order, None);
        let (b, c, d) = (cand(&e, "b"), cand(&e, "c"), cand(&e, "d"));
        assert_eq!(r.domination(b, c), Domination::Dominates);
        assert_eq!(r.domination(c, d), Domination::Dominates);
        assert_eq!(r.domination(d, b), Domination::Dominates);
        assert!(r.consensual_losers.is_empty());
    }

    #[test]
    fn symmetric_electorate_ties() {
        let set = CandidateSet::alphabetic(2).unwrap();
        let e = Electorate::from_compact(set, StrategyTag::LeaderRule, &[("P", "ab", 1.0), ("Q", "ba", 1.0)]).unwrap();
        assert_eq!(dominates(&e, cand(&e, "a"), cand(&e, "b")), Domination::Tie);
        let r = condorcet_analysis(&e);
        assert_eq!(r.condorcet_winner, None);
        assert_eq!(r.condorcet_loser, None);
    }

    #[test]
    fn single_type_gives_full_order() {
        let set = CandidateSet::alphabetic(3).unwrap();
        let e = Electorate::from_compact(set, StrategyTag::LeaderRule, &[("P", "abc", 1.0)]).unwrap();
        let r = condorcet_analysis(&e);
        let (a, b, c) = (cand(&e, "a"), cand(&e, "b"), cand(&e, "c"));
        assert_eq!(r.condorcet_winner, Some(a));
        assert_eq!(r.condorcet_loser, Some(c));
        assert_eq!(r.condorcet_order, Some(vec![a, b, c]));
    }

    #[test]
    fn strong_mode_counts_abstainers() {
        // a beats b 103 to 100 but only among 307 voters: not a strict majority.
        let e = fixtures::consensual_loser_cycle();
        let (a, b) = (cand(&e, "a"), cand(&e, "b"));
        assert_eq!(dominates_with(&e, a, b, CondorcetMode::Strong), Domination::Tie);
        let r = condorcet_analysis_with(&e, CondorcetMode::Strong);
        assert_eq!(r.condorcet_winner, None);
    }

    #[test]
    fn tied_consensual_losers_need_not_be_condorcet_losers() {
        // both a and c are ranked last by a strict majority, yet c beats a.
        let e = fixtures::tent_electorate();
        let r = condorcet_analysis(&e);
        let (a, b, c) = (cand(&e, "a"), cand(&e, "b"), cand(&e, "c"));
        assert_eq!(r.consensual_losers, vec![a, c]);
        assert_eq!(r.consensual_loser(), None);
        assert_eq!(r.condorcet_winner, Some(b));
        assert_eq!(r.condorcet_loser, Some(a));
    }

    fn one_dim(cands: &[f64], types: &[(f64, f64)]) -> (PositionalModel, Electorate) {
        let set = CandidateSet::alphabetic(cands.len()).unwrap();
        let vts = types
            .iter()
            .enumerate()
            .map(|(i, &(x, w))| {
                let mut order: Vec<usize> = (0..cands.len()).collect();
                order.sort_by(|&p, &q| (cands[p] - x).abs().total_cmp(&(cands[q] - x).abs()));
                let order: Vec<Candidate> = order.into_iter().map(Candidate::new).collect();
                VoterType::new(
                    format!("T{i}"),
                    Preference::linear(cands.len(), &order).unwrap(),
                    w,
                    StrategyTag::LeaderRule,
                )
            })
            .collect();
        let model = PositionalModel {
            dim: 1,
            candidates: cands.to_vec(),
            types: types.iter().map(|t| t.0).collect(),
        };
        (model, Electorate::new(set, vts).unwrap())
    }

    #[test]
    fn median_by_cumulative_weight() {
        // cumulative weights 1, 2 of 3.5: the type at 0.5 is the median
        let (m, e) = one_dim(&[0.2, 0.75], &[(0.1, 1.0), (0.5, 1.0), (0.9, 1.5)]);
        let mv = median_candidate(&m, &e).unwrap();
        assert_eq!(mv.median_type, 1);
        assert_eq!(mv.candidate, Candidate::new(1));
        // brute-force domination agrees
        assert_eq!(condorcet_analysis(&e).condorcet_winner, Some(mv.candidate));
    }

    #[test]
    fn median_rejects_equidistant_candidates() {
        let (m, e) = one_dim(&[0.25, 0.75], &[(0.1, 1.0), (0.5, 1.0), (0.9, 1.5)]);
        assert!(matches!(median_candidate(&m, &e), Err(Error::NotGeneric(_))));
    }

    #[test]
    fn median_rejects_balanced_split() {
        let (m, e) = one_dim(&[0.2, 0.7], &[(0.1, 1.0), (0.9, 1.0)]);
        assert!(matches!(median_candidate(&m, &e), Err(Error::NotGeneric(_))));
    }

    #[test]
    fn single_type_is_its_own_median() {
        let (m, e) = one_dim(&[0.1, 0.4, 0.9], &[(0.8, 0.3)]);
        let mv = median_candidate(&m, &e).unwrap();
        assert_eq!(mv.median_type, 0);
        assert_eq!(mv.candidate, Candidate::new(2));
    }
}
