//! Frequency of Condorcet winners and of bad polling dynamics over random
//! electorates.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::culture::{sample_electorate_detailed, Culture, CultureSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pd::{build_pd_graph, classify, Verdict};
use crate::social::condorcet_analysis;
use crate::strategy::StrategyTag;

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959964;

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("wilson interval needs at least one trial"));
    }
    if successes > n {
        return Err(Error::invalid(format!("{successes} successes out of {n} trials")));
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the bounds reach 0 and 1 exactly at the extremes; rounding may not
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if p == 1.0 { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub trials: u64,
    pub condorcet: u64,
    pub bad: u64,
    pub resamples: u64,
}

impl Counts {
    fn merge(self, o: Counts) -> Counts {
        Counts {
            trials: self.trials + o.trials,
            condorcet: self.condorcet + o.condorcet,
            bad: self.bad + o.bad,
            resamples: self.resamples + o.resamples,
        }
    }
}

/// Outcome of one random electorate.
pub fn run_trial(spec: &CultureSpec, trial_index: u64) -> Result<Counts> {
    let sampled = sample_electorate_detailed(spec, trial_index)?;
    let e = &sampled.electorate;
    let social = condorcet_analysis(e);
    let mut c = Counts {
        trials: 1,
        resamples: sampled.resamples as u64,
        ..Counts::default()
    };
    if social.condorcet_winner.is_some() {
        c.condorcet = 1;
        let report = classify(&build_pd_graph(e)?, &social);
        if report.is_bad() == Verdict::Bad {
            c.bad = 1;
        }
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResult {
    pub spec: CultureSpec,
    pub counts: Counts,
    pub cw_interval: (f64, f64),
    /// Absent when no trial had a Condorcet winner.
    pub bad_interval: Option<(f64, f64)>,
    pub runtime: Duration,
}

impl ConditionResult {
    pub fn n_trials(&self) -> u64 {
        self.counts.trials
    }

    pub fn cw_rate(&self) -> f64 {
        self.counts.condorcet as f64 / self.counts.trials as f64
    }

    /// Among trials with a Condorcet winner.
    pub fn bad_rate(&self) -> Option<f64> {
        (self.counts.condorcet > 0).then(|| self.counts.bad as f64 / self.counts.condorcet as f64)
    }
}

pub fn run_condition(spec: &CultureSpec, n_trials: u64) -> Result<ConditionResult> {
    run_condition_with(spec, n_trials, Execution::default())
}

/// Counts are merged by addition, so results do not depend on scheduling.
pub fn run_condition_with(spec: &CultureSpec, n_trials: u64, exec: Execution) -> Result<ConditionResult> {
    if n_trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    spec.validate()?;
    let start = Instant::now();
    let counts = exec.map_reduce(
        n_trials,
        || Ok(Counts::default()),
        |i| run_trial(spec, i),
        |a, b| Ok(a?.merge(b?)),
    )?;
    let cw_interval = wilson_interval(counts.condorcet, counts.trials, WILSON_Z)?;
    let bad_interval = if counts.condorcet > 0 {
        Some(wilson_interval(counts.bad, counts.condorcet, WILSON_Z)?)
    } else {
        None
    };
    Ok(ConditionResult {
        spec: *spec,
        counts,
        cw_interval,
        bad_interval,
        runtime: start.elapsed(),
    })
}

/// Every combination of sizes, cultures and strategies, in that nesting
/// order.
pub fn grid(sizes: &[(usize, usize)], cultures: &[Culture], strategies: &[StrategyTag], seed: u64) -> Vec<CultureSpec> {
    let mut out = Vec::new();
    for &(n_candidates, n_types) in sizes {
        for &culture in cultures {
            for &strategy in strategies {
                out.push(CultureSpec {
                    culture,
                    n_candidates,
                    n_types,
                    strategy,
                    seed,
                });
            }
        }
    }
    out
}

pub fn run_table(specs: &[CultureSpec], n_trials: u64, exec: Execution) -> Result<Vec<ConditionResult>> {
    specs.iter().map(|s| run_condition_with(s, n_trials, exec)).collect()
}

#[derive(Serialize)]
struct Row {
    culture: &'static str,
    d: Option<usize>,
    strategy: &'static str,
    n_candidates: usize,
    n_types: usize,
    n_trials: u64,
    cw_rate: f64,
    cw_low: f64,
    cw_high: f64,
    bad_rate: Option<f64>,
    bad_low: Option<f64>,
    bad_high: Option<f64>,
    seed: u64,
}

/// One header row and one row per condition; runtimes are left out so the
/// output is reproducible.
pub fn write_csv<W: Write>(results: &[ConditionResult], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for r in results {
        w.serialize(Row {
            culture: r.spec.culture.name(),
            d: r.spec.culture.dim(),
            strategy: r.spec.strategy.short_name(),
            n_candidates: r.spec.n_candidates,
            n_types: r.spec.n_types,
            n_trials: r.counts.trials,
            cw_rate: r.cw_rate(),
            cw_low: r.cw_interval.0,
            cw_high: r.cw_interval.1,
            bad_rate: r.bad_rate(),
            bad_low: r.bad_interval.map(|i| i.0),
            bad_high: r.bad_interval.map(|i| i.1),
            seed: r.spec.seed,
        })?;
    }
    w.flush()?;
    Ok(())
}
