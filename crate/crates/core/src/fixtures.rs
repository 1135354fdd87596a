//! Hand-built electorates with known dynamics.

use crate::model::{CandidateSet, Electorate};
use crate::strategy::StrategyTag;

fn build(n: usize, strategy: StrategyTag, types: &[(&str, &str, f64)]) -> Electorate {
    Electorate::from_compact(CandidateSet::alphabetic(n).expect("valid size"), strategy, types)
        .expect("fixture electorate is valid")
}

/// Four candidates under the leader rule: `a` is a Condorcet winner but a
/// 3-cycle `ba → da → ca` never elects her.
pub fn four_candidate_cycle() -> Electorate {
    build(
        4,
        StrategyTag::LeaderRule,
        &[
            ("T", "abcd", 100.0),
            ("U", "bacd", 1000.0),
            ("V", "cadb", 1001.0),
            ("W", "dabc", 1002.0),
            ("X", "bcad", 1004.0),
            ("Y", "cdab", 1008.0),
            ("Z", "dbac", 1016.0),
        ],
    )
}

/// Three candidates with ties: a 2-cycle alternating between the Condorcet
/// winner `a` and the consensual loser `c`.
pub fn consensual_loser_cycle() -> Electorate {
    build(
        3,
        StrategyTag::ModifiedLeaderRule,
        &[
            ("Z", "abc", 101.0),
            ("Y", "a(bc)", 2.0),
            ("X", "bac", 100.0),
            ("W", "c(ab)", 104.0),
        ],
    )
}

/// Same preferences with weights 3, 1, 3, 5: the cycle survives partial
/// adjustment. Also the base electorate of the collaboration models.
pub fn perturbed_cycle() -> Electorate {
    collaboration_electorate(3.0, 1.0, 3.0, 5.0)
}

/// Types `Z: abc`, `Y: a(bc)`, `X: bac`, `W: c(ab)` with the given weights.
pub fn collaboration_electorate(n_z: f64, n_y: f64, n_x: f64, n_w: f64) -> Electorate {
    build(
        3,
        StrategyTag::ModifiedLeaderRule,
        &[
            ("Z", "abc", n_z),
            ("Y", "a(bc)", n_y),
            ("X", "bac", n_x),
            ("W", "c(ab)", n_w),
        ],
    )
}

/// `Z: abc 2`, `Y: b(ac) 3.5`, `X: c(ab) 4.5`; only `Z` has a choice.
pub fn tent_electorate() -> Electorate {
    build(
        3,
        StrategyTag::ModifiedLeaderRule,
        &[("Z", "abc", 2.0), ("Y", "b(ac)", 3.5), ("X", "c(ab)", 4.5)],
    )
}
