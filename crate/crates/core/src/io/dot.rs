//! Graphviz rendering of the PD graph.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::Electorate;
use crate::pd::{DynamicsReport, PdGraph, PdState};

const GREEN: &str = "green";
const LIGHT_GREEN: &str = "palegreen";
const ORANGE: &str = "orange";
const RED: &str = "red";
const GREY: &str = "grey";

/// One node per state labelled `wr`, one edge per non-loop transition.
///
/// With a report and a Condorcet winner, states electing it are green (light
/// green for an equilibrium) and periodic states electing someone else are
/// orange, or red for a fixed point. With `unreachable_after = Some(k)`,
/// transient states outside `PD^k` are grey.
pub fn export_dot(
    graph: &PdGraph,
    e: &Electorate,
    report: Option<&DynamicsReport>,
    unreachable_after: Option<usize>,
) -> String {
    let n = graph.n_candidates();
    let image: Option<BTreeSet<PdState>> = unreachable_after.map(|k| graph.image_after(k));
    let mut out = String::from("digraph pd {\n  node [shape=circle];\n");
    for s in graph.states() {
        let i = s.index(n);
        let mut attrs = format!("label=\"{}\"", s.label(e));
        let periodic = graph.is_periodic(s);
        let fixed = graph.successor(s) == s;
        let colour = report
            .and_then(|r| r.condorcet_winner)
            .and_then(|cw| match (s.winner == cw, periodic, fixed) {
                (true, _, true) => Some((LIGHT_GREEN, "cw-equilibrium")),
                (true, _, false) => Some((GREEN, "cw")),
                (false, true, true) => Some((RED, "bad-equilibrium")),
                (false, true, false) => Some((ORANGE, "bad-cycle")),
                (false, false, _) => None,
            });
        let colour = match &image {
            Some(img) if !periodic && !img.contains(&s) => Some((GREY, "unreachable")),
            _ => colour,
        };
        if let Some((c, class)) = colour {
            let _ = write!(attrs, ", style=filled, fillcolor={c}, class=\"{class}\"");
        }
        let _ = writeln!(out, "  s{i} [{attrs}];");
    }
    for s in graph.states() {
        let t = graph.successor(s);
        if t != s {
            let _ = writeln!(out, "  s{} -> s{};", s.index(n), t.index(n));
        }
    }
    out.push_str("}\n");
    out
}
