//! Continuous polling dynamics on the product of per-type ballot simplices.
//!
//! Each voter type splits its weight over its admissible ballots, the image
//! of its discrete strategy. Aggregating gives a tally, the tally gives an
//! outcome, and a generalized strategy per type moves the split.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{outcome_from_tally, Ballot, Candidate, CandidateSet, Electorate, Outcome, Tally, VoterType};
use crate::pd::{n_states, PdState};

/// Proportions over one type's admissible ballots.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    /// Clamps to `[0,1]` and rescales to sum 1.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let mut p = SimplexPoint { weights };
        if p.weights.is_empty() || p.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("simplex point needs finite entries"));
        }
        p.normalize()?;
        Ok(p)
    }

    pub fn vertex(len: usize, i: usize) -> Self {
        let mut weights = vec![0.0; len];
        weights[i] = 1.0;
        SimplexPoint { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `t · vertex(i) + (1 - t) · self`.
    pub fn pull_towards(&self, i: usize, t: f64) -> Self {
        let mut weights: Vec<f64> = self.weights.iter().map(|w| (1.0 - t) * w).collect();
        weights[i] += t;
        let mut p = SimplexPoint { weights };
        p.normalize().expect("convex combination stays on the simplex");
        p
    }

    fn normalize(&mut self) -> Result<()> {
        for w in &mut self.weights {
            *w = w.clamp(0.0, 1.0);
        }
        let sum: f64 = self.weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::invalid("simplex point has zero mass"));
        }
        if (sum - 1.0).abs() > 1e-15 {
            for w in &mut self.weights {
                *w /= sum;
            }
        }
        Ok(())
    }
}

pub type CpdState = Vec<SimplexPoint>;

/// Admissible ballots per voter type, sorted by bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct BallotSpace {
    ballots: Vec<Vec<Ballot>>,
}

impl BallotSpace {
    /// Every ballot the type's discrete strategy casts for some outcome.
    pub fn from_strategies(e: &Electorate) -> Result<Self> {
        let n = e.n_candidates();
        if n < 2 {
            return Err(Error::TooFewCandidates(n));
        }
        let ballots = e
            .types()
            .iter()
            .map(|t| {
                let mut bs = (0..n_states(n))
                    .map(|i| {
                        let s = PdState::from_index(i, n);
                        t.strategy.ballot(&t.preference, s.winner, s.runner_up)
                    })
                    .collect::<Result<Vec<_>>>()?;
                bs.sort();
                bs.dedup();
                Ok(bs)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BallotSpace { ballots })
    }

    pub fn ballots(&self, type_index: usize) -> &[Ballot] {
        &self.ballots[type_index]
    }

    pub fn position(&self, type_index: usize, b: Ballot) -> Option<usize> {
        self.ballots[type_index].binary_search(&b).ok()
    }

    pub fn n_types(&self) -> usize {
        self.ballots.len()
    }
}

/// `v`: the election held when each type splits as in `s`.
pub fn aggregate(e: &Electorate, space: &BallotSpace, s: &CpdState) -> Result<Tally> {
    if s.len() != e.types().len() {
        return Err(Error::DimensionMismatch(s.len(), e.types().len()));
    }
    let mut scores = vec![0.0; e.n_candidates()];
    for (i, (t, point)) in e.types().iter().zip(s).enumerate() {
        let bs = space.ballots(i);
        if bs.len() != point.len() {
            return Err(Error::DimensionMismatch(point.len(), bs.len()));
        }
        for (&b, &mass) in bs.iter().zip(point.weights()) {
            for c in b.iter() {
                scores[c.index()] += t.weight * mass;
            }
        }
    }
    Ok(Tally::new(scores))
}

/// A deterministic map on some state space with a winner per state.
pub trait Dynamics {
    type State: Clone;

    fn step(&self, s: &Self::State) -> Self::State;
    fn winner(&self, s: &Self::State) -> Candidate;
    /// Sup-norm distance.
    fn distance(&self, a: &Self::State, b: &Self::State) -> f64;
    fn coordinates(&self, s: &Self::State) -> Vec<f64>;
    fn coordinate_names(&self) -> Vec<String>;
    fn candidates(&self) -> &CandidateSet;
}

/// Information a generalized strategy may use about its own type.
pub struct TypeContext<'a> {
    pub voter: &'a VoterType,
    pub ballots: &'a [Ballot],
    pub total_weight: f64,
}

impl TypeContext<'_> {
    pub fn ballot_index(&self, b: Ballot) -> Option<usize> {
        self.ballots.binary_search(&b).ok()
    }

    /// Index of the discrete strategy's ballot for `o`.
    pub fn discrete_target(&self, o: &Outcome) -> usize {
        let b = self
            .voter
            .strategy
            .ballot(&self.voter.preference, o.winner(), o.runner_up())
            .expect("electorate validated the strategy");
        self.ballot_index(b).expect("ballot space holds every strategy output")
    }
}

/// `g_Ω`: new split from the previous split and the expected outcome.
pub trait GeneralizedStrategy: Send + Sync {
    fn update(&self, ctx: &TypeContext<'_>, prev: &SimplexPoint, o: &Outcome) -> SimplexPoint;
}

/// Unit mass on the discrete strategy's ballot.
#[derive(Clone, Copy, Debug)]
pub struct Discrete;

impl GeneralizedStrategy for Discrete {
    fn update(&self, ctx: &TypeContext<'_>, prev: &SimplexPoint, o: &Outcome) -> SimplexPoint {
        SimplexPoint::vertex(prev.len(), ctx.discrete_target(o))
    }
}

/// Behaviour when some score gap falls below the margin threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fallback {
    #[default]
    Keep,
    Apply,
    ApplyHalf,
}

impl std::str::FromStr for Fallback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "keep" => Ok(Fallback::Keep),
            "apply" => Ok(Fallback::Apply),
            "half" | "apply-half" => Ok(Fallback::ApplyHalf),
            _ => Err(Error::invalid(format!("unknown fallback `{s}`"))),
        }
    }
}

/// A fraction `p` moves to the discrete ballot when every score gap is at
/// least `theta` of the total weight.
#[derive(Clone, Copy, Debug)]
pub struct Perturbed {
    pub p: f64,
    pub theta: f64,
    pub fallback: Fallback,
}

impl GeneralizedStrategy for Perturbed {
    fn update(&self, ctx: &TypeContext<'_>, prev: &SimplexPoint, o: &Outcome) -> SimplexPoint {
        let p = if o.min_margin() >= self.theta * ctx.total_weight {
            self.p
        } else {
            match self.fallback {
                Fallback::Keep => return prev.clone(),
                Fallback::Apply => self.p,
                Fallback::ApplyHalf => self.p / 2.0,
            }
        };
        prev.pull_towards(ctx.discrete_target(o), p)
    }
}

/// `Φ`: one generalized strategy per voter type.
#[derive(Clone)]
pub struct CpdMap {
    electorate: Electorate,
    space: BallotSpace,
    strategies: Vec<Arc<dyn GeneralizedStrategy>>,
}

impl std::fmt::Debug for CpdMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CpdMap")
            .field("electorate", &self.electorate)
            .field("space", &self.space)
            .finish_non_exhaustive()
    }
}

impl CpdMap {
    pub fn new(electorate: Electorate, strategies: Vec<Arc<dyn GeneralizedStrategy>>) -> Result<Self> {
        if strategies.len() != electorate.types().len() {
            return Err(Error::MissingAssignment {
                expected: electorate.types().len(),
                got: strategies.len(),
            });
        }
        let space = BallotSpace::from_strategies(&electorate)?;
        Ok(CpdMap {
            electorate,
            space,
            strategies,
        })
    }

    pub fn uniform(electorate: Electorate, g: Arc<dyn GeneralizedStrategy>) -> Result<Self> {
        let strategies = vec![g; electorate.types().len()];
        Self::new(electorate, strategies)
    }

    pub fn electorate(&self) -> &Electorate {
        &self.electorate
    }

    pub fn space(&self) -> &BallotSpace {
        &self.space
    }

    pub fn aggregate(&self, s: &CpdState) -> Tally {
        aggregate(&self.electorate, &self.space, s).expect("state matches its map")
    }

    pub fn outcome(&self, s: &CpdState) -> Outcome {
        outcome_from_tally(self.aggregate(s)).expect("at least two candidates")
    }

    /// Each type on its first admissible ballot.
    pub fn first_vertex(&self) -> CpdState {
        (0..self.space.n_types())
            .map(|i| SimplexPoint::vertex(self.space.ballots(i).len(), 0))
            .collect()
    }

    /// Each type on the ballot its discrete strategy casts when `expected`
    /// is announced.
    pub fn extreme_state_for(&self, expected: PdState) -> CpdState {
        self.electorate
            .types()
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let b = t
                    .strategy
                    .ballot(&t.preference, expected.winner, expected.runner_up)
                    .expect("electorate validated the strategy");
                let bs = self.space.ballots(i);
                SimplexPoint::vertex(bs.len(), self.space.position(i, b).expect("admissible"))
            })
            .collect()
    }

    pub fn state_from_weights(&self, weights: Vec<Vec<f64>>) -> Result<CpdState> {
        if weights.len() != self.space.n_types() {
            return Err(Error::DimensionMismatch(weights.len(), self.space.n_types()));
        }
        weights
            .into_iter()
            .enumerate()
            .map(|(i, w)| {
                if w.len() != self.space.ballots(i).len() {
                    return Err(Error::DimensionMismatch(w.len(), self.space.ballots(i).len()));
                }
                SimplexPoint::new(w)
            })
            .collect()
    }

    fn context(&self, i: usize) -> TypeContext<'_> {
        TypeContext {
            voter: &self.electorate.types()[i],
            ballots: self.space.ballots(i),
            total_weight: self.electorate.total_weight(),
        }
    }

    /// Type index and ballot index of every free coordinate: all ballots but
    /// the first of each type with a choice.
    fn free_coordinates(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.space.n_types()).flat_map(move |i| (1..self.space.ballots(i).len()).map(move |j| (i, j)))
    }
}

impl Dynamics for CpdMap {
    type State = CpdState;

    fn step(&self, s: &CpdState) -> CpdState {
        let o = self.outcome(s);
        s.iter()
            .enumerate()
            .map(|(i, point)| self.strategies[i].update(&self.context(i), point, &o))
            .collect()
    }

    fn winner(&self, s: &CpdState) -> Candidate {
        self.outcome(s).winner()
    }

    fn distance(&self, a: &CpdState, b: &CpdState) -> f64 {
        a.iter()
            .zip(b)
            .flat_map(|(p, q)| p.weights().iter().zip(q.weights()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    fn coordinates(&self, s: &CpdState) -> Vec<f64> {
        self.free_coordinates().map(|(i, j)| s[i].weights()[j]).collect()
    }

    fn coordinate_names(&self) -> Vec<String> {
        let set = self.electorate.candidates();
        self.free_coordinates()
            .map(|(i, j)| {
                format!(
                    "{}{}",
                    self.electorate.types()[i].name,
                    self.space.ballots(i)[j].display(set)
                )
            })
            .collect()
    }

    fn candidates(&self) -> &CandidateSet {
        self.electorate.candidates()
    }
}

/// `Φ₀`: every type jumps to its discrete ballot.
pub fn embed_discrete(e: &Electorate) -> Result<CpdMap> {
    CpdMap::uniform(e.clone(), Arc::new(Discrete))
}

pub fn perturbed_lr_map(e: &Electorate, p: f64, theta: f64, fallback: Fallback) -> Result<CpdMap> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("p must lie in (0, 1], got {p}")));
    }
    if theta.is_nan() || theta < 0.0 {
        return Err(Error::invalid(format!("theta must be non-negative, got {theta}")));
    }
    CpdMap::uniform(e.clone(), Arc::new(Perturbed { p, theta, fallback }))
}

fn xz_slots(map: &CpdMap) -> Result<[(usize, usize); 2]> {
    let e = map.electorate();
    let ab = Ballot::from_candidates([e.candidates().lookup("a")?, e.candidates().lookup("b")?]);
    let mut slots = [(0, 0); 2];
    for (k, name) in ["X", "Z"].into_iter().enumerate() {
        let i = e
            .type_index(name)
            .ok_or_else(|| Error::invalid(format!("no voter type `{name}`")))?;
        let j = map
            .space()
            .position(i, ab)
            .ok_or_else(|| Error::invalid(format!("type `{name}` cannot approve {{a,b}}")))?;
        if map.space().ballots(i).len() != 2 {
            return Err(Error::invalid(format!("type `{name}` must have exactly two ballots")));
        }
        slots[k] = (i, j);
    }
    Ok(slots)
}

/// State of the four-type collaboration electorate where `x` is the share
/// of `X` approving `{a,b}` and `z` the share of `Z`; the other types sit on
/// their only ballot.
pub fn xz_state(map: &CpdMap, x: f64, z: f64) -> Result<CpdState> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&z) {
        return Err(Error::invalid(format!("({x}, {z}) is outside the unit square")));
    }
    let slots = xz_slots(map)?;
    let mut s = map.first_vertex();
    for ((i, j), v) in slots.into_iter().zip([x, z]) {
        let mut w = vec![0.0; 2];
        w[j] = v;
        w[1 - j] = 1.0 - v;
        s[i] = SimplexPoint::new(w)?;
    }
    Ok(s)
}

pub fn xz_coordinates(map: &CpdMap, s: &CpdState) -> Result<(f64, f64)> {
    let [(ix, jx), (iz, jz)] = xz_slots(map)?;
    Ok((s[ix].weights()[jx], s[iz].weights()[jz]))
}

/// A map on the four-type collaboration electorate seen through its
/// `(x, z)` coordinates.
#[derive(Clone, Debug)]
pub struct XzMap {
    inner: CpdMap,
}

impl XzMap {
    pub fn new(inner: CpdMap) -> Result<Self> {
        xz_slots(&inner)?;
        Ok(XzMap { inner })
    }

    pub fn inner(&self) -> &CpdMap {
        &self.inner
    }

    pub fn state(&self, x: f64, z: f64) -> Result<CpdState> {
        xz_state(&self.inner, x, z)
    }

    pub fn xz(&self, s: &CpdState) -> (f64, f64) {
        xz_coordinates(&self.inner, s).expect("checked at construction")
    }
}

impl Dynamics for XzMap {
    type State = CpdState;

    fn step(&self, s: &CpdState) -> CpdState {
        self.inner.step(s)
    }

    fn winner(&self, s: &CpdState) -> Candidate {
        self.inner.winner(s)
    }

    fn distance(&self, a: &CpdState, b: &CpdState) -> f64 {
        self.inner.distance(a, b)
    }

    fn coordinates(&self, s: &CpdState) -> Vec<f64> {
        let (x, z) = self.xz(s);
        vec![x, z]
    }

    fn coordinate_names(&self) -> Vec<String> {
        vec!["x".into(), "z".into()]
    }

    fn candidates(&self) -> &CandidateSet {
        self.inner.candidates()
    }
}

/// Cell centres of a `res × res` grid on the unit square, row by row in `z`.
pub fn grid_points(res: usize) -> Vec<(f64, f64)> {
    let h = 1.0 / res as f64;
    (0..res)
        .flat_map(|j| (0..res).map(move |i| ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)))
        .collect()
}

/// The first `iters` iterates of every start, computed in parallel.
pub fn orbits_from<D>(map: &D, starts: &[D::State], iters: usize, exec: Execution) -> Vec<Orbit<D::State>>
where
    D: Dynamics + Sync,
    D::State: Send + Sync,
{
    exec.map_collect(starts.len(), |i| {
        iterate(map, &starts[i], iters, IterateOptions::default())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IterateOptions {
    /// Leading steps not recorded.
    pub discard: usize,
    /// Record every `every`-th step after the transient.
    pub every: usize,
}

impl Default for IterateOptions {
    fn default() -> Self {
        IterateOptions { discard: 0, every: 1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Orbit<S> {
    pub steps: Vec<usize>,
    pub states: Vec<S>,
    pub winners: Vec<Candidate>,
}

/// States `s_0 ..= s_n` with `s_{k+1} = Φ(s_k)`, thinned per `opts`.
pub fn iterate<D: Dynamics>(map: &D, s0: &D::State, n: usize, opts: IterateOptions) -> Orbit<D::State> {
    let every = opts.every.max(1);
    let mut orbit = Orbit {
        steps: Vec::new(),
        states: Vec::new(),
        winners: Vec::new(),
    };
    let mut s = s0.clone();
    for k in 0..=n {
        if k >= opts.discard && (k - opts.discard).is_multiple_of(every) {
            orbit.steps.push(k);
            orbit.winners.push(map.winner(&s));
            orbit.states.push(s.clone());
        }
        if k < n {
            s = map.step(&s);
        }
    }
    orbit
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbit<S> {
    pub states: Vec<S>,
    pub winners: Vec<Candidate>,
}

/// Looks for a point of exact period `k` by iterating `Φ^k` from each start
/// until it returns within `tol` of itself. Points that already close up
/// after a proper divisor of `k` are rejected. The cycle is rotated to start
/// at the state with the earliest winner.
pub fn find_periodic_orbit<D: Dynamics>(
    map: &D,
    starts: impl IntoIterator<Item = D::State>,
    k: usize,
    tol: f64,
    max_iter: usize,
) -> Option<PeriodicOrbit<D::State>> {
    if k == 0 {
        return None;
    }
    for start in starts {
        let mut s = start;
        for _ in 0..max_iter {
            let mut cycle = Vec::with_capacity(k + 1);
            cycle.push(s.clone());
            for _ in 0..k {
                let next = map.step(cycle.last().unwrap());
                cycle.push(next);
            }
            let back = cycle.pop().unwrap();
            if map.distance(&back, &s) < tol {
                let smaller = (1..k).filter(|&d| k.is_multiple_of(d)).any(|d| map.distance(&cycle[d], &s) < tol);
                if smaller {
                    break;
                }
                let winners: Vec<Candidate> = cycle.iter().map(|x| map.winner(x)).collect();
                let first = (0..k).min_by_key(|&i| winners[i]).unwrap();
                let mut states = cycle;
                let mut winners = winners;
                states.rotate_left(first);
                winners.rotate_left(first);
                return Some(PeriodicOrbit { states, winners });
            }
            s = back;
        }
    }
    None
}
