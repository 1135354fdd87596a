//! Random electorates: impartial culture and ℓ¹ spatial cultures.
//!
//! Every voter type also places a `limit` pseudo-candidate in its ranking.
//! Under the leader rule the limit is simply dropped; under the modified
//! rule everything ranked below it collapses into one last tie-group.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Candidate, CandidateSet, Electorate, Preference, VoterType};
use crate::social::PositionalModel;
use crate::strategy::StrategyTag;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Culture {
    Impartial,
    Spatial { dim: usize },
}

impl Culture {
    pub fn name(self) -> &'static str {
        match self {
            Culture::Impartial => "impartial",
            Culture::Spatial { .. } => "spatial",
        }
    }

    pub fn dim(self) -> Option<usize> {
        match self {
            Culture::Impartial => None,
            Culture::Spatial { dim } => Some(dim),
        }
    }
}

impl fmt::Display for Culture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Culture::Impartial => f.write_str("impartial"),
            Culture::Spatial { dim } => write!(f, "spatial(d={dim})"),
        }
    }
}

impl FromStr for Culture {
    type Err = Error;

    /// Accepts `impartial`, `spatial` (d = 1) or `spatial:D`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.split_once(':') {
            None if lower == "impartial" => Ok(Culture::Impartial),
            None if lower == "spatial" => Ok(Culture::Spatial { dim: 1 }),
            Some(("spatial", d)) => {
                let dim = d.parse().map_err(|_| Error::invalid(format!("bad dimension `{d}`")))?;
                if dim == 0 {
                    return Err(Error::invalid("dimension must be positive"));
                }
                Ok(Culture::Spatial { dim })
            }
            _ => Err(Error::invalid(format!("unknown culture `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CultureSpec {
    pub culture: Culture,
    pub n_candidates: usize,
    pub n_types: usize,
    pub strategy: StrategyTag,
    pub seed: u64,
}

impl CultureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates < 2 {
            return Err(Error::TooFewCandidates(self.n_candidates));
        }
        if self.n_candidates > 26 {
            return Err(Error::invalid("cultures support at most 26 candidates"));
        }
        if self.n_types == 0 {
            return Err(Error::invalid("at least one voter type is required"));
        }
        if self.culture == (Culture::Spatial { dim: 0 }) {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(())
    }
}

/// Independent generator for one trial: the seed selects the key and the
/// trial index selects the ChaCha stream.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

#[derive(Clone, Debug)]
pub struct SampledElectorate {
    pub electorate: Electorate,
    /// Candidate and type positions for spatial cultures.
    pub positions: Option<PositionalModel>,
    /// Number of candidates ranked above the limit, per type.
    pub limit_ranks: Vec<usize>,
    /// Exact floating-point ties that forced a redraw.
    pub resamples: usize,
}

pub fn sample_electorate(spec: &CultureSpec, trial_index: u64) -> Result<Electorate> {
    Ok(sample_electorate_detailed(spec, trial_index)?.electorate)
}

pub fn sample_electorate_detailed(spec: &CultureSpec, trial_index: u64) -> Result<SampledElectorate> {
    spec.validate()?;
    let mut rng = trial_rng(spec.seed, trial_index);
    let n = spec.n_candidates;
    let mut resamples = 0;
    let mut orders = Vec::with_capacity(spec.n_types);
    let mut limit_ranks = Vec::with_capacity(spec.n_types);
    let mut positions = None;

    match spec.culture {
        Culture::Impartial => {
            // index n stands for the limit
            let mut items: Vec<usize> = (0..=n).collect();
            for _ in 0..spec.n_types {
                items.shuffle(&mut rng);
                let limit = items.iter().position(|&i| i == n).unwrap();
                orders.push(items.iter().copied().filter(|&i| i != n).collect::<Vec<_>>());
                limit_ranks.push(limit);
            }
        }
        Culture::Spatial { dim } => {
            let mut cands = vec![0.0; n * dim];
            rng.fill(&mut cands[..]);
            while let Some(dup) = duplicate_point(&cands, dim) {
                rng.fill(&mut cands[dup * dim..(dup + 1) * dim]);
                resamples += 1;
            }
            let mut types = vec![0.0; spec.n_types * dim];
            let mut scratch = vec![0.0; 2 * dim];
            for t in 0..spec.n_types {
                let (order, dist) = loop {
                    rng.fill(&mut types[t * dim..(t + 1) * dim]);
                    let p = &types[t * dim..(t + 1) * dim];
                    let dist: Vec<f64> = (0..n).map(|c| l1(p, &cands[c * dim..(c + 1) * dim])).collect();
                    let mut order: Vec<usize> = (0..n).collect();
                    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]));
                    if order.windows(2).all(|w| dist[w[0]] != dist[w[1]]) {
                        break (order, dist);
                    }
                    resamples += 1;
                };
                let threshold = loop {
                    rng.fill(&mut scratch[..]);
                    let th = l1(&scratch[..dim], &scratch[dim..]);
                    if dist.iter().all(|&d| d != th) {
                        break th;
                    }
                    resamples += 1;
                };
                limit_ranks.push(dist.iter().filter(|&&d| d < threshold).count());
                orders.push(order);
            }
            positions = Some(PositionalModel {
                dim,
                candidates: cands,
                types,
            });
        }
    }

    let set = CandidateSet::alphabetic(n)?;
    let mut vts = Vec::with_capacity(spec.n_types);
    for (t, (order, &limit)) in orders.iter().zip(&limit_ranks).enumerate() {
        let weight: f64 = rng.random();
        let order: Vec<Candidate> = order.iter().map(|&i| Candidate::new(i)).collect();
        let preference = match spec.strategy {
            StrategyTag::LeaderRule => Preference::linear(n, &order)?,
            StrategyTag::ModifiedLeaderRule => {
                let mut groups: Vec<Vec<Candidate>> = order[..limit].iter().map(|&c| vec![c]).collect();
                if limit < n {
                    groups.push(order[limit..].to_vec());
                }
                Preference::from_groups(n, groups)?
            }
        };
        vts.push(VoterType::new(format!("T{t}"), preference, weight, spec.strategy));
    }
    Ok(SampledElectorate {
        electorate: Electorate::new(set, vts)?,
        positions,
        limit_ranks,
        resamples,
    })
}

fn duplicate_point(points: &[f64], dim: usize) -> Option<usize> {
    let n = points.len() / dim;
    (1..n).find(|&i| (0..i).any(|j| points[i * dim..(i + 1) * dim] == points[j * dim..(j + 1) * dim]))
}

fn l1(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

pub fn l1_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch(p.len(), q.len()));
    }
    Ok(l1(p, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::social::{condorcet_analysis, median_candidate};

    fn spec(culture: Culture, strategy: StrategyTag, n: usize, m: usize) -> CultureSpec {
        CultureSpec {
            culture,
            n_candidates: n,
            n_types: m,
            strategy,
            seed: 7,
        }
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_distance(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(l1_distance(&[0.25], &[0.75]).unwrap(), 0.5);
        assert!(matches!(
            l1_distance(&[0.0], &[0.0, 1.0]),
            Err(Error::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn mean_uniform_distance_is_a_third_per_axis() {
        let mut rng = trial_rng(3, 0);
        for d in [1usize, 2, 5] {
            let n = 1_000_000;
            let mut buf = vec![0.0; 2 * d];
            let mut sum = 0.0;
            for _ in 0..n {
                rng.fill(&mut buf[..]);
                sum += l1(&buf[..d], &buf[d..]);
            }
            let mean = sum / n as f64;
            let expected = d as f64 / 3.0;
            assert!((mean - expected).abs() < 0.01 * expected, "d={d}: {mean}");
        }
    }

    #[test]
    fn impartial_limit_rank_is_central() {
        let s = spec(Culture::Impartial, StrategyTag::LeaderRule, 6, 100);
        let mut sum = 0usize;
        let mut count = 0usize;
        for trial in 0..1000 {
            let r = sample_electorate_detailed(&s, trial).unwrap();
            sum += r.limit_ranks.iter().sum::<usize>();
            count += r.limit_ranks.len();
        }
        let mean = sum as f64 / count as f64;
        assert!((mean - 3.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn spatial_limit_rank_is_central() {
        for d in [1, 2, 3] {
            let s = spec(Culture::Spatial { dim: d }, StrategyTag::ModifiedLeaderRule, 6, 50);
            let mut sum = 0usize;
            let mut count = 0usize;
            for trial in 0..2000 {
                let r = sample_electorate_detailed(&s, trial).unwrap();
                sum += r.limit_ranks.iter().sum::<usize>();
                count += r.limit_ranks.len();
            }
            let mean = sum as f64 / count as f64 / 6.0;
            assert!((mean - 0.5).abs() < 0.02, "d={d}: {mean}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        for culture in [
            Culture::Impartial,
            Culture::Spatial { dim: 1 },
            Culture::Spatial { dim: 3 },
        ] {
            let s = spec(culture, StrategyTag::ModifiedLeaderRule, 5, 8);
            assert_eq!(sample_electorate(&s, 11).unwrap(), sample_electorate(&s, 11).unwrap());
            assert_ne!(sample_electorate(&s, 11).unwrap(), sample_electorate(&s, 12).unwrap());
        }
    }

    #[test]
    fn leader_rule_preferences_are_tie_free() {
        let s = spec(Culture::Spatial { dim: 2 }, StrategyTag::LeaderRule, 6, 20);
        let e = sample_electorate(&s, 0).unwrap();
        assert!(e.types().iter().all(|t| t.preference.is_tie_free()));
    }

    #[test]
    fn modified_rule_ties_below_the_limit() {
        let s = spec(Culture::Impartial, StrategyTag::ModifiedLeaderRule, 6, 20);
        let r = sample_electorate_detailed(&s, 4).unwrap();
        for (t, &k) in r.electorate.types().iter().zip(&r.limit_ranks) {
            let groups = t.preference.groups();
            assert!(groups[..k].iter().all(|g| g.len() == 1));
            let expected = if k < 6 { k + 1 } else { 6 };
            assert_eq!(groups.len(), expected);
        }
    }

    fn single_peaked(order: &[Candidate], pos: &[f64]) -> bool {
        // each prefix of the ranking is an interval of the positions
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (k, c) in order.iter().enumerate() {
            lo = lo.min(pos[c.index()]);
            hi = hi.max(pos[c.index()]);
            let inside = pos.iter().filter(|&&x| x >= lo && x <= hi).count();
            if inside != k + 1 {
                return false;
            }
        }
        true
    }

    #[test]
    fn one_dimensional_culture_is_single_peaked_with_median_winner() {
        let s = spec(Culture::Spatial { dim: 1 }, StrategyTag::LeaderRule, 6, 20);
        for trial in 0..500 {
            let r = sample_electorate_detailed(&s, trial).unwrap();
            let model = r.positions.as_ref().unwrap();
            for t in r.electorate.types() {
                let order: Vec<Candidate> = t.preference.groups().iter().map(|g| g[0]).collect();
                assert!(single_peaked(&order, &model.candidates));
            }
            let cw = condorcet_analysis(&r.electorate).condorcet_winner;
            assert!(cw.is_some());
            assert_eq!(cw, Some(median_candidate(model, &r.electorate).unwrap().candidate));
        }
    }

    #[test]
    fn culture_parsing() {
        assert_eq!("impartial".parse::<Culture>().unwrap(), Culture::Impartial);
        assert_eq!("spatial:400".parse::<Culture>().unwrap(), Culture::Spatial { dim: 400 });
        assert!("spatial:0".parse::<Culture>().is_err());
        assert!("mallows".parse::<Culture>().is_err());
    }
}
