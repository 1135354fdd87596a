//! Opportunity-driven voters: a type shifts towards its compromise ballot
//! when the race looks unsafe for its favourite.
//!
//! [`CollaborationModel`] is the reduced two-coordinate model on the four-type
//! collaboration electorate. [`collaboration_map`] builds the same dynamics
//! on the general simplex machinery, and [`ExactTent`] iterates the
//! one-coordinate tent model in exact integer arithmetic.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cpd::{CpdMap, Discrete, Dynamics, GeneralizedStrategy, SimplexPoint, TypeContext};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::model::{Ballot, Candidate, CandidateSet, Electorate, Outcome};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SafetyKind {
    /// `|V2 - V3|` when `V2 > V1`, else `½|V2 - V3| + ½|V1 - V3|`.
    #[default]
    TwoCase,
    /// `|V2 - V3|`.
    SimpleMargin,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    Raw,
    #[default]
    ByTotalWeight,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Normalization::Raw),
            "total" => Ok(Normalization::ByTotalWeight),
            _ => Err(Error::invalid(format!("unknown normalization `{s}`"))),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Raw => "raw",
            Normalization::ByTotalWeight => "total",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyFunction {
    pub kind: SafetyKind,
    pub normalization: Normalization,
}

impl SafetyFunction {
    /// `V1` is the type's favourite, `V2` its compromise, `V3` the rest.
    pub fn eval(&self, v1: f64, v2: f64, v3: f64, total_weight: f64) -> f64 {
        let (v1, v2, v3) = match self.normalization {
            Normalization::Raw => (v1, v2, v3),
            Normalization::ByTotalWeight => (v1 / total_weight, v2 / total_weight, v3 / total_weight),
        };
        match self.kind {
            SafetyKind::SimpleMargin => (v2 - v3).abs(),
            SafetyKind::TwoCase if v2 > v1 => (v2 - v3).abs(),
            SafetyKind::TwoCase => 0.5 * (v2 - v3).abs() + 0.5 * (v1 - v3).abs(),
        }
    }
}

/// Share of a type that votes for its compromise, given the safety.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CollaborationFunction {
    /// `(1 - κ t)₊`
    LinearClamped(f64),
    /// `1 / (1 + λ t)`
    Rational(f64),
}

impl Default for CollaborationFunction {
    fn default() -> Self {
        CollaborationFunction::LinearClamped(5.0)
    }
}

impl CollaborationFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            CollaborationFunction::LinearClamped(k) => (1.0 - k * t).max(0.0),
            CollaborationFunction::Rational(l) => 1.0 / (1.0 + l * t),
        }
    }
}

/// How the score of `b` depends on the reduced coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum VbConvention {
    /// `n_Z z + x`
    Literal,
    /// `n_Z z + n_X`, as aggregation of the electorate gives.
    #[default]
    Derived,
}

impl FromStr for VbConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "literal" => Ok(VbConvention::Literal),
            "derived" => Ok(VbConvention::Derived),
            _ => Err(Error::invalid(format!("unknown convention `{s}`"))),
        }
    }
}

impl fmt::Display for VbConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VbConvention::Literal => "literal",
            VbConvention::Derived => "derived",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChaosModelConfig {
    pub n_z: f64,
    pub n_y: f64,
    pub n_x: f64,
    pub n_w: f64,
    pub safety: SafetyFunction,
    pub collaboration: CollaborationFunction,
    pub vb: VbConvention,
}

impl Default for ChaosModelConfig {
    fn default() -> Self {
        ChaosModelConfig {
            n_z: 3.0,
            n_y: 1.0,
            n_x: 3.0,
            n_w: 5.0,
            safety: SafetyFunction::default(),
            collaboration: CollaborationFunction::default(),
            vb: VbConvention::Derived,
        }
    }
}

impl ChaosModelConfig {
    /// Weights `Z = 0.56, Y = 0.08, X = 0.6, W = 0.81`, which settle on a
    /// period-22 winners word.
    pub fn period_22() -> Self {
        ChaosModelConfig {
            n_z: 0.56,
            n_y: 0.08,
            n_x: 0.6,
            n_w: 0.81,
            ..Self::default()
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.n_z + self.n_y + self.n_x + self.n_w
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in [("Z", self.n_z), ("Y", self.n_y), ("X", self.n_x), ("W", self.n_w)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidWeight {
                    name: name.into(),
                    weight: w,
                });
            }
        }
        match self.collaboration {
            CollaborationFunction::LinearClamped(k) | CollaborationFunction::Rational(k)
                if !(k.is_finite() && k >= 0.0) =>
            {
                Err(Error::invalid(format!(
                    "collaboration parameter must be non-negative, got {k}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn electorate(&self) -> Electorate {
        fixtures::collaboration_electorate(self.n_z, self.n_y, self.n_x, self.n_w)
    }
}

/// Reduced map on `(x, z)`: `x` is the share of `X: bac` approving `{a,b}`
/// and `z` the share of `Z: abc` approving `{a,b}`.
#[derive(Clone, Debug)]
pub struct CollaborationModel {
    config: ChaosModelConfig,
    candidates: CandidateSet,
}

impl CollaborationModel {
    pub fn new(config: ChaosModelConfig) -> Result<Self> {
        config.validate()?;
        Ok(CollaborationModel {
            config,
            candidates: CandidateSet::alphabetic(3)?,
        })
    }

    pub fn config(&self) -> &ChaosModelConfig {
        &self.config
    }

    /// Scores of `a`, `b`, `c`.
    pub fn scores(&self, s: &[f64; 2]) -> [f64; 3] {
        let c = &self.config;
        let [x, z] = *s;
        let vb = match c.vb {
            VbConvention::Literal => c.n_z * z + x,
            VbConvention::Derived => c.n_z * z + c.n_x,
        };
        [c.n_z + c.n_y + c.n_x * x, vb, c.n_w]
    }
}

fn argmax3(v: [f64; 3]) -> Candidate {
    let mut best = 0;
    for i in 1..3 {
        if v[i] > v[best] {
            best = i;
        }
    }
    Candidate::new(best)
}

impl Dynamics for CollaborationModel {
    type State = [f64; 2];

    fn step(&self, s: &[f64; 2]) -> [f64; 2] {
        let [va, vb, vc] = self.scores(s);
        let total = self.config.total_weight();
        let f = &self.config.safety;
        let g = &self.config.collaboration;
        [g.eval(f.eval(vb, va, vc, total)), g.eval(f.eval(va, vb, vc, total))]
    }

    fn winner(&self, s: &[f64; 2]) -> Candidate {
        argmax3(self.scores(s))
    }

    fn distance(&self, a: &[f64; 2], b: &[f64; 2]) -> f64 {
        (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
    }

    fn coordinates(&self, s: &[f64; 2]) -> Vec<f64> {
        s.to_vec()
    }

    fn coordinate_names(&self) -> Vec<String> {
        vec!["x".into(), "z".into()]
    }

    fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }
}

/// A tie-free three-candidate type puts `C(S(V1, V2, V3))` on
/// `{first, second}` and the rest on `{first}`.
#[derive(Clone, Copy, Debug)]
pub struct Collaborative {
    pub safety: SafetyFunction,
    pub collaboration: CollaborationFunction,
}

impl GeneralizedStrategy for Collaborative {
    fn update(&self, ctx: &TypeContext<'_>, prev: &SimplexPoint, o: &Outcome) -> SimplexPoint {
        let groups = ctx.voter.preference.groups();
        let (first, second, third) = (groups[0][0], groups[1][0], groups[2][0]);
        let v = |c: Candidate| o.scores().score(c);
        let share = self
            .collaboration
            .eval(self.safety.eval(v(first), v(second), v(third), ctx.total_weight));
        let alone = ctx
            .ballot_index(Ballot::from_candidates([first]))
            .expect("checked at build");
        let pair = ctx
            .ballot_index(Ballot::from_candidates([first, second]))
            .expect("checked at build");
        let mut w = vec![0.0; prev.len()];
        w[alone] = 1.0 - share;
        w[pair] = share;
        SimplexPoint::new(w).expect("share lies in [0,1]")
    }
}

/// Tie-free types of a three-candidate electorate collaborate; the others
/// keep their discrete strategy.
pub fn collaboration_map(
    e: &Electorate,
    safety: SafetyFunction,
    collaboration: CollaborationFunction,
) -> Result<CpdMap> {
    if e.n_candidates() != 3 {
        return Err(Error::invalid("the collaboration model needs exactly three candidates"));
    }
    let probe = CpdMap::uniform(e.clone(), Arc::new(Discrete))?;
    let strategies = e
        .types()
        .iter()
        .enumerate()
        .map(|(i, t)| -> Result<Arc<dyn GeneralizedStrategy>> {
            if !t.preference.is_tie_free() {
                return Ok(Arc::new(Discrete));
            }
            let g = t.preference.groups();
            for b in [
                Ballot::from_candidates([g[0][0]]),
                Ballot::from_candidates([g[0][0], g[1][0]]),
            ] {
                if probe.space().position(i, b).is_none() {
                    return Err(Error::invalid(format!(
                        "type `{}` cannot cast {}",
                        t.name,
                        b.display(e.candidates())
                    )));
                }
            }
            Ok(Arc::new(Collaborative { safety, collaboration }))
        })
        .collect::<Result<Vec<_>>>()?;
    CpdMap::new(e.clone(), strategies)
}

/// The reduced model built on the general machinery. Only the derived
/// convention has a counterpart there.
pub fn collaboration_cpd_map(config: &ChaosModelConfig) -> Result<CpdMap> {
    config.validate()?;
    if config.vb != VbConvention::Derived {
        return Err(Error::invalid("only the derived convention comes from an electorate"));
    }
    collaboration_map(&config.electorate(), config.safety, config.collaboration)
}

/// `Z: abc 2`, `Y: b(ac) 3.5`, `X: c(ab) 4.5` with safety `|V_b - V_c|`
/// relative to the total weight and `C(t) = (1 - 10t)₊`, so that
/// `z ↦ 1 - |2z - 1|`.
pub fn tent_map() -> Result<CpdMap> {
    collaboration_map(
        &fixtures::tent_electorate(),
        SafetyFunction {
            kind: SafetyKind::SimpleMargin,
            normalization: Normalization::ByTotalWeight,
        },
        CollaborationFunction::LinearClamped(10.0),
    )
}

/// Tent map on `{0, 1/q, ..., 1}` with state `p` standing for `p/q`.
///
/// With the default prime, 2 generates the multiplicative group, so orbits
/// of generic starts have period close to `q`.
#[derive(Clone, Debug)]
pub struct ExactTent {
    q: u64,
    candidates: CandidateSet,
}

impl ExactTent {
    /// Safe prime below 2⁶¹ with 2 as a primitive root.
    pub const DEFAULT_DENOMINATOR: u64 = 2_305_843_009_213_691_579;

    pub fn new(q: u64) -> Result<Self> {
        if q == 0 || q.is_multiple_of(2) || q >= 1 << 62 {
            return Err(Error::invalid(format!(
                "denominator must be odd and below 2^62, got {q}"
            )));
        }
        Ok(ExactTent {
            q,
            candidates: CandidateSet::alphabetic(3)?,
        })
    }

    pub fn denominator(&self) -> u64 {
        self.q
    }

    /// Nearest grid point to `z`.
    pub fn state_from_f64(&self, z: f64) -> Result<u64> {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::invalid(format!("{z} is outside [0, 1]")));
        }
        Ok(((z * self.q as f64).round() as u64).min(self.q))
    }

    pub fn value(&self, p: u64) -> f64 {
        p as f64 / self.q as f64
    }
}

impl Default for ExactTent {
    fn default() -> Self {
        ExactTent::new(Self::DEFAULT_DENOMINATOR).expect("valid constant")
    }
}

impl Dynamics for ExactTent {
    type State = u64;

    fn step(&self, p: &u64) -> u64 {
        let twice = 2 * p;
        if twice <= self.q {
            twice
        } else {
            2 * self.q - twice
        }
    }

    /// `b` when `z ≥ ½`, else `c`.
    fn winner(&self, p: &u64) -> Candidate {
        Candidate::new(if 2 * p >= self.q { 1 } else { 2 })
    }

    fn distance(&self, a: &u64, b: &u64) -> f64 {
        a.abs_diff(*b) as f64 / self.q as f64
    }

    fn coordinates(&self, p: &u64) -> Vec<f64> {
        vec![self.value(*p)]
    }

    fn coordinate_names(&self) -> Vec<String> {
        vec!["z".into()]
    }

    fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpd::{iterate, xz_coordinates, xz_state, IterateOptions};

    const RAW: SafetyFunction = SafetyFunction {
        kind: SafetyKind::TwoCase,
        normalization: Normalization::Raw,
    };

    #[test]
    fn safety_cases() {
        assert_eq!(RAW.eval(1.0, 2.0, 0.5, 1.0), 1.5);
        assert_eq!(RAW.eval(2.0, 1.0, 1.0, 1.0), 0.5);
        let norm = SafetyFunction {
            kind: SafetyKind::TwoCase,
            normalization: Normalization::ByTotalWeight,
        };
        assert_eq!(norm.eval(1.0, 2.0, 0.5, 2.0), 0.75);
        let simple = SafetyFunction {
            kind: SafetyKind::SimpleMargin,
            normalization: Normalization::Raw,
        };
        assert_eq!(simple.eval(9.0, 2.0, 0.5, 1.0), 1.5);
    }

    #[test]
    fn collaboration_shapes() {
        let lin = CollaborationFunction::LinearClamped(5.0);
        assert_eq!(lin.eval(0.0), 1.0);
        assert_eq!(lin.eval(0.1), 0.5);
        assert_eq!(lin.eval(1.0), 0.0);
        let rat = CollaborationFunction::Rational(45.0);
        assert_eq!(rat.eval(0.0), 1.0);
        assert_eq!(rat.eval(1.0 / 45.0), 0.5);
    }

    #[test]
    fn literal_raw_first_step() {
        let m = CollaborationModel::new(ChaosModelConfig {
            safety: RAW,
            vb: VbConvention::Literal,
            ..Default::default()
        })
        .unwrap();
        let s = [0.5, 0.5];
        assert_eq!(m.scores(&s), [5.5, 2.0, 5.0]);
        assert_eq!(m.step(&s)[0], 0.0);
        assert_eq!(m.winner(&s), Candidate::new(0));
    }

    #[test]
    fn normalized_x_update_is_the_folded_line() {
        // while a leads b, x' = 1 - (5/12)|3x - 1|
        let m = CollaborationModel::new(ChaosModelConfig::default()).unwrap();
        for x in [0.0, 0.2, 1.0 / 3.0, 0.7, 1.0] {
            let x1 = m.step(&[x, 0.1])[0];
            assert!((x1 - (1.0 - 5.0 / 12.0 * (3.0 * x - 1.0).abs())).abs() < 1e-12);
        }
    }

    #[test]
    fn default_word_prefix() {
        let m = CollaborationModel::new(ChaosModelConfig::default()).unwrap();
        let o = iterate(&m, &[0.5, 0.5], 32, IterateOptions::default());
        let word: String = o.winners[1..]
            .iter()
            .map(|&c| m.candidates().name(c).to_string())
            .collect();
        assert_eq!(word, "aaacacaaacacacaaacacacacacaaacac");
    }

    #[test]
    fn reduced_and_general_models_agree() {
        for collaboration in [
            CollaborationFunction::LinearClamped(5.0),
            CollaborationFunction::Rational(45.0),
        ] {
            for config in [ChaosModelConfig::default(), ChaosModelConfig::period_22()] {
                let config = ChaosModelConfig {
                    collaboration,
                    ..config
                };
                let reduced = CollaborationModel::new(config).unwrap();
                let general = collaboration_cpd_map(&config).unwrap();
                // one step at a time: rounding differences blow up along a
                // chaotic orbit
                let mut r = [0.5, 0.5];
                for _ in 0..500 {
                    let g = xz_state(&general, r[0], r[1]).unwrap();
                    assert_eq!(reduced.winner(&r), general.winner(&g));
                    let next = reduced.step(&r);
                    let (x, z) = xz_coordinates(&general, &general.step(&g)).unwrap();
                    assert!((x - next[0]).abs() < 1e-12 && (z - next[1]).abs() < 1e-12);
                    r = next;
                }
            }
        }
        let literal = ChaosModelConfig {
            vb: VbConvention::Literal,
            ..Default::default()
        };
        assert!(collaboration_cpd_map(&literal).is_err());
    }

    #[test]
    fn maps_stay_in_the_unit_square() {
        for vb in [VbConvention::Literal, VbConvention::Derived] {
            for normalization in [Normalization::Raw, Normalization::ByTotalWeight] {
                let m = CollaborationModel::new(ChaosModelConfig {
                    vb,
                    safety: SafetyFunction {
                        kind: SafetyKind::TwoCase,
                        normalization,
                    },
                    ..Default::default()
                })
                .unwrap();
                for i in 0..=20 {
                    for j in 0..=20 {
                        let s = m.step(&[i as f64 / 20.0, j as f64 / 20.0]);
                        assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
                    }
                }
            }
        }
    }

    #[test]
    fn float_tent_model() {
        let map = tent_map().unwrap();
        for (z, expected) in [(0.5, 1.0), (1.0, 0.0), (0.0, 0.0), (0.25, 0.5), (0.9, 0.2)] {
            let s = map
                .state_from_weights(vec![vec![1.0 - z, z], vec![1.0], vec![1.0]])
                .unwrap();
            let next = map.step(&s);
            assert!((next[0].weights()[1] - expected).abs() < 1e-12, "{z}");
        }
        let s = map
            .state_from_weights(vec![vec![0.6, 0.4], vec![1.0], vec![1.0]])
            .unwrap();
        assert_eq!(map.winner(&s), Candidate::new(2));
        let s = map
            .state_from_weights(vec![vec![0.5, 0.5], vec![1.0], vec![1.0]])
            .unwrap();
        assert_eq!(map.winner(&s), Candidate::new(1));
    }

    #[test]
    fn exact_tent_two_fifths() {
        let t = ExactTent::new(5).unwrap();
        let o = iterate(&t, &2, 6, IterateOptions::default());
        assert_eq!(o.states, vec![2, 4, 2, 4, 2, 4, 2]);
        let word = t.candidates().word(o.winners.iter().copied());
        assert_eq!(word, "cbcbcbc");
    }

    #[test]
    fn exact_tent_endpoints() {
        let t = ExactTent::default();
        let q = t.denominator();
        assert_eq!(t.step(&q), 0);
        assert_eq!(t.step(&0), 0);
        assert_eq!(t.step(&(q / 2)), q - 1);
        assert!(ExactTent::new(10).is_err());
    }

    #[test]
    fn exact_and_float_tent_agree_early() {
        let exact = ExactTent::default();
        let float = tent_map().unwrap();
        let mut p = exact.state_from_f64(0.3141592653).unwrap();
        let mut s = float
            .state_from_weights(vec![vec![1.0 - exact.value(p), exact.value(p)], vec![1.0], vec![1.0]])
            .unwrap();
        for _ in 0..20 {
            assert_eq!(exact.winner(&p), float.winner(&s));
            p = exact.step(&p);
            s = float.step(&s);
            assert!((exact.value(p) - s[0].weights()[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn exact_tent_letter_frequencies() {
        let t = ExactTent::default();
        let mut p = t.state_from_f64(0.123456789).unwrap();
        let n = 100_000;
        let mut b = 0;
        for _ in 0..n {
            if t.winner(&p) == Candidate::new(1) {
                b += 1;
            }
            p = t.step(&p);
        }
        let f = b as f64 / n as f64;
        assert!((f - 0.5).abs() < 0.01, "{f}");
    }
}
