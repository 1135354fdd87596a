//! Discrete polling dynamics over (winner, runner-up) states.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{outcome_from_tally, tally, Ballot, Candidate, Electorate, Tally};
use crate::social::CondorcetReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PdState {
    pub winner: Candidate,
    pub runner_up: Candidate,
}

impl PdState {
    pub fn new(winner: Candidate, runner_up: Candidate) -> Self {
        PdState { winner, runner_up }
    }

    /// Dense index in `0..n(n-1)`, ordered by winner then runner-up.
    pub fn index(self, n: usize) -> usize {
        let (w, r) = (self.winner.index(), self.runner_up.index());
        w * (n - 1) + if r < w { r } else { r - 1 }
    }

    pub fn from_index(i: usize, n: usize) -> Self {
        let w = i / (n - 1);
        let r = i % (n - 1);
        let r = if r < w { r } else { r + 1 };
        PdState::new(Candidate::new(w), Candidate::new(r))
    }

    pub fn label(self, e: &Electorate) -> String {
        e.candidates().word([self.winner, self.runner_up])
    }
}

impl fmt::Display for PdState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.winner, self.runner_up)
    }
}

pub fn n_states(n_candidates: usize) -> usize {
    n_candidates * (n_candidates - 1)
}

/// Every type's ballot given the expected state.
pub fn ballots(e: &Electorate, s: PdState) -> Result<Vec<Ballot>> {
    e.types()
        .iter()
        .map(|t| t.strategy.ballot(&t.preference, s.winner, s.runner_up))
        .collect()
}

/// The tally produced when every voter expects `s`.
pub fn pd_tally(e: &Electorate, s: PdState) -> Result<Tally> {
    tally(e, &ballots(e, s)?)
}

pub fn pd_step(e: &Electorate, s: PdState) -> Result<PdState> {
    let o = outcome_from_tally(pd_tally(e, s)?)?;
    Ok(PdState::new(o.winner(), o.runner_up()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PdGraph {
    n_candidates: usize,
    successor: Vec<usize>,
    scores: Vec<Tally>,
    cycles: Vec<Vec<usize>>,
    cycle_of: Vec<usize>,
    pub condorcet_winner: Option<Candidate>,
}

pub fn build_pd_graph(e: &Electorate) -> Result<PdGraph> {
    let n = e.n_candidates();
    if n < 2 {
        return Err(Error::TooFewCandidates(n));
    }
    let m = n_states(n);
    let mut successor = Vec::with_capacity(m);
    let mut scores = Vec::with_capacity(m);
    for i in 0..m {
        let t = pd_tally(e, PdState::from_index(i, n))?;
        let o = outcome_from_tally(t.clone())?;
        successor.push(PdState::new(o.winner(), o.runner_up()).index(n));
        scores.push(t);
    }

    const UNSEEN: usize = usize::MAX;
    let mut cycle_of = vec![UNSEEN; m];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    // visit stamp per walk, so a walk hitting its own trail found a new cycle
    let mut stamp = vec![UNSEEN; m];
    for start in 0..m {
        if cycle_of[start] != UNSEEN {
            continue;
        }
        let mut path = Vec::new();
        let mut s = start;
        while cycle_of[s] == UNSEEN && stamp[s] != start {
            stamp[s] = start;
            path.push(s);
            s = successor[s];
        }
        let target = if cycle_of[s] != UNSEEN {
            cycle_of[s]
        } else {
            let pos = path.iter().position(|&p| p == s).expect("on path");
            let mut cycle = path[pos..].to_vec();
            let min = (0..cycle.len()).min_by_key(|&i| cycle[i]).unwrap();
            cycle.rotate_left(min);
            cycles.push(cycle);
            cycles.len() - 1
        };
        for p in path {
            cycle_of[p] = target;
        }
    }

    let condorcet_winner = crate::social::condorcet_analysis(e).condorcet_winner;
    Ok(PdGraph {
        n_candidates: n,
        successor,
        scores,
        cycles,
        cycle_of,
        condorcet_winner,
    })
}

impl PdGraph {
    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    pub fn n_states(&self) -> usize {
        self.successor.len()
    }

    pub fn states(&self) -> impl Iterator<Item = PdState> + '_ {
        (0..self.n_states()).map(|i| PdState::from_index(i, self.n_candidates))
    }

    pub fn successor(&self, s: PdState) -> PdState {
        PdState::from_index(self.successor[s.index(self.n_candidates)], self.n_candidates)
    }

    /// Scores of the election held when everyone expects `s`.
    pub fn scores(&self, s: PdState) -> &Tally {
        &self.scores[s.index(self.n_candidates)]
    }

    pub fn cycles(&self) -> Vec<Vec<PdState>> {
        (0..self.cycles.len()).map(|c| self.cycle(c)).collect()
    }

    /// Cycle `c`, starting from its lowest-indexed state.
    pub fn cycle(&self, c: usize) -> Vec<PdState> {
        self.cycles[c]
            .iter()
            .map(|&i| PdState::from_index(i, self.n_candidates))
            .collect()
    }

    pub fn n_cycles(&self) -> usize {
        self.cycles.len()
    }

    /// Index of the cycle that `s` eventually reaches.
    pub fn basin_of(&self, s: PdState) -> usize {
        self.cycle_of[s.index(self.n_candidates)]
    }

    pub fn basin(&self, c: usize) -> Vec<PdState> {
        self.states().filter(|&s| self.basin_of(s) == c).collect()
    }

    pub fn basin_size(&self, c: usize) -> usize {
        self.cycle_of.iter().filter(|&&k| k == c).count()
    }

    pub fn is_periodic(&self, s: PdState) -> bool {
        self.cycles[self.basin_of(s)].contains(&s.index(self.n_candidates))
    }

    /// States of the form `PD^k(s)`.
    pub fn image_after(&self, k: usize) -> BTreeSet<PdState> {
        let mut current: Vec<usize> = (0..self.n_states()).collect();
        for _ in 0..k {
            for s in current.iter_mut() {
                *s = self.successor[*s];
            }
        }
        current
            .into_iter()
            .map(|i| PdState::from_index(i, self.n_candidates))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Bad,
    Good,
    /// No Condorcet winner, so badness is not defined.
    Undefined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleReport {
    pub states: Vec<PdState>,
    pub winners: BTreeSet<Candidate>,
    pub trivial: bool,
    /// Some state of the cycle elects someone other than the Condorcet
    /// winner; `None` without a Condorcet winner.
    pub bad: Option<bool>,
    pub basin_size: usize,
}

impl CycleReport {
    pub fn period(&self) -> usize {
        self.states.len()
    }

    pub fn is_fixed_point(&self) -> bool {
        self.states.len() == 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsReport {
    pub condorcet_winner: Option<Candidate>,
    pub cycles: Vec<CycleReport>,
}

impl DynamicsReport {
    pub fn is_bad(&self) -> Verdict {
        match self.condorcet_winner {
            None => Verdict::Undefined,
            Some(_) if self.cycles.iter().any(|c| c.bad == Some(true)) => Verdict::Bad,
            Some(_) => Verdict::Good,
        }
    }
}

pub fn classify(graph: &PdGraph, social: &CondorcetReport) -> DynamicsReport {
    let cw = social.condorcet_winner;
    let cycles = (0..graph.n_cycles())
        .map(|c| {
            let states = graph.cycle(c);
            let winners: BTreeSet<Candidate> = states.iter().map(|s| s.winner).collect();
            CycleReport {
                trivial: winners.len() == 1,
                bad: cw.map(|w| winners.iter().any(|&x| x != w)),
                basin_size: graph.basin_size(c),
                states,
                winners,
            }
        })
        .collect();
    DynamicsReport {
        condorcet_winner: cw,
        cycles,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::CandidateSet;
    use crate::social::condorcet_analysis;
    use crate::strategy::StrategyTag;

    fn st(e: &Electorate, label: &str) -> PdState {
        let mut cs = label.chars().map(|ch| e.candidates().lookup(&ch.to_string()).unwrap());
        PdState::new(cs.next().unwrap(), cs.next().unwrap())
    }

    fn labels(e: &Electorate, ss: &[PdState]) -> Vec<String> {
        ss.iter().map(|s| s.label(e)).collect()
    }

    #[test]
    fn state_index_roundtrip() {
        for n in 2..7 {
            for i in 0..n_states(n) {
                assert_eq!(PdState::from_index(i, n).index(n), i);
            }
        }
    }

    #[test]
    fn four_candidate_steps_and_tallies() {
        let e = fixtures::four_candidate_cycle();
        assert_eq!(pd_step(&e, st(&e, "ba")).unwrap(), st(&e, "da"));
        assert_eq!(pd_step(&e, st(&e, "da")).unwrap(), st(&e, "ca"));
        assert_eq!(pd_step(&e, st(&e, "ca")).unwrap(), st(&e, "ba"));
        assert_eq!(
            pd_tally(&e, st(&e, "ba")).unwrap().scores(),
            &[3111.0, 3020.0, 2009.0, 4027.0]
        );
        assert_eq!(
            pd_tally(&e, st(&e, "da")).unwrap().scores(),
            &[3105.0, 2104.0, 4113.0, 3026.0]
        );
        assert_eq!(
            pd_tally(&e, st(&e, "ca")).unwrap().scores(),
            &[3118.0, 4122.0, 3013.0, 2018.0]
        );
        assert_eq!(
            pd_tally(&e, st(&e, "ad")).unwrap().scores(),
            &[3105.0, 3020.0, 3013.0, 3026.0]
        );
    }

    #[test]
    fn four_candidate_graph() {
        let e = fixtures::four_candidate_cycle();
        let g = build_pd_graph(&e).unwrap();
        assert_eq!(g.n_states(), 12);
        let cycles: Vec<Vec<String>> = g.cycles().iter().map(|c| labels(&e, c)).collect();
        assert_eq!(cycles.len(), 2);
        assert!(cycles.contains(&vec!["ad".to_string()]));
        assert!(cycles.contains(&vec!["ba".into(), "da".into(), "ca".into()]));
        let three = g.basin_of(st(&e, "ba"));
        let fixed = g.basin_of(st(&e, "ad"));
        // the 3-cycle attracts three quarters of the states
        assert_eq!(g.basin_size(three), 9);
        assert_eq!(labels(&e, &g.basin(fixed)), vec!["ab", "ac", "ad"]);

        let r = classify(&g, &condorcet_analysis(&e));
        assert_eq!(r.is_bad(), Verdict::Bad);
        let c3 = &r.cycles[three];
        assert_eq!(c3.period(), 3);
        assert_eq!(c3.bad, Some(true));
        assert!(!c3.winners.contains(&st(&e, "ab").winner));
        assert!(!c3.trivial);
        assert_eq!(r.cycles[fixed].bad, Some(false));
    }

    #[test]
    fn four_candidate_image() {
        let e = fixtures::four_candidate_cycle();
        let g = build_pd_graph(&e).unwrap();
        let img = g.image_after(1);
        let missing: Vec<String> = g.states().filter(|s| !img.contains(s)).map(|s| s.label(&e)).collect();
        assert_eq!(missing, vec!["ab", "ac", "cb", "db", "dc"]);
        assert_eq!(g.image_after(0).len(), 12);
    }

    #[test]
    fn three_candidate_graph() {
        let e = fixtures::consensual_loser_cycle();
        assert_eq!(pd_step(&e, st(&e, "bc")).unwrap(), st(&e, "bc"));
        assert_eq!(pd_tally(&e, st(&e, "bc")).unwrap().scores(), &[103.0, 201.0, 104.0]);
        assert_eq!(pd_tally(&e, st(&e, "ab")).unwrap().scores(), &[103.0, 100.0, 104.0]);
        assert_eq!(pd_tally(&e, st(&e, "ca")).unwrap().scores(), &[203.0, 201.0, 104.0]);
        let g = build_pd_graph(&e).unwrap();
        let cycles: Vec<Vec<String>> = g.cycles().iter().map(|c| labels(&e, c)).collect();
        assert_eq!(cycles.len(), 3);
        let two = g.basin_of(st(&e, "ab"));
        assert_eq!(labels(&e, &g.cycle(two)), vec!["ab", "ca"]);
        assert_eq!(g.basin_size(two), 4);
        let ac = g.basin_of(st(&e, "ac"));
        let bc = g.basin_of(st(&e, "bc"));
        assert_eq!(g.basin_size(ac), 1);
        assert_eq!(g.basin_size(bc), 1);

        let r = classify(&g, &condorcet_analysis(&e));
        assert_eq!(r.cycles[two].bad, Some(true));
        assert_eq!(r.cycles[bc].bad, Some(true));
        assert_eq!(r.cycles[ac].bad, Some(false));
        assert!(r.cycles[ac].trivial);
        assert_eq!(r.is_bad(), Verdict::Bad);
    }

    #[test]
    fn undefined_without_condorcet_winner() {
        let set = CandidateSet::alphabetic(3).unwrap();
        let e = Electorate::from_compact(
            set,
            StrategyTag::LeaderRule,
            &[("P", "abc", 1.0), ("Q", "bca", 1.0), ("R", "cab", 1.0)],
        )
        .unwrap();
        let g = build_pd_graph(&e).unwrap();
        let r = classify(&g, &condorcet_analysis(&e));
        assert_eq!(r.is_bad(), Verdict::Undefined);
        assert!(r.cycles.iter().all(|c| c.bad.is_none()));
    }

    #[test]
    fn unanimous_electorate_is_good() {
        let set = CandidateSet::alphabetic(4).unwrap();
        let e = Electorate::from_compact(set, StrategyTag::LeaderRule, &[("P", "cadb", 2.0)]).unwrap();
        let g = build_pd_graph(&e).unwrap();
        let r = classify(&g, &condorcet_analysis(&e));
        assert_eq!(r.is_bad(), Verdict::Good);
        assert!(r.cycles.iter().all(|c| c.winners.len() == 1));
    }

    #[test]
    fn two_candidates_have_constant_winner() {
        let set = CandidateSet::alphabetic(2).unwrap();
        for (wa, wb) in [(1.0, 2.0), (3.0, 1.0), (1.0, 1.0)] {
            let e = Electorate::from_compact(
                set.clone(),
                StrategyTag::LeaderRule,
                &[("P", "ab", wa), ("Q", "ba", wb)],
            )
            .unwrap();
            let g = build_pd_graph(&e).unwrap();
            let a = g.successor(PdState::from_index(0, 2));
            let b = g.successor(PdState::from_index(1, 2));
            assert_eq!(a, b);
            assert_eq!(g.n_cycles(), 1);
        }
    }
}
