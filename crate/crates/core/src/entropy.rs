//! Subword statistics of winners words and entropy estimates.

use std::collections::HashMap;

use crate::cpd::Dynamics;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{Candidate, CandidateSet};

#[derive(Clone, Debug, PartialEq)]
pub struct WinnersWord {
    letters: Vec<u8>,
    alphabet: CandidateSet,
}

impl WinnersWord {
    pub fn new(alphabet: CandidateSet, letters: impl IntoIterator<Item = Candidate>) -> Self {
        let letters = letters.into_iter().map(|c| c.index() as u8).collect();
        WinnersWord { letters, alphabet }
    }

    /// One letter per character; the alphabet is the sorted set of
    /// characters used.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut chars: Vec<char> = text.chars().collect();
        chars.sort_unstable();
        chars.dedup();
        let alphabet = CandidateSet::new(chars.iter().map(|c| c.to_string()))?;
        let letters = text.chars().map(|ch| chars.binary_search(&ch).unwrap() as u8).collect();
        Ok(WinnersWord { letters, alphabet })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn alphabet(&self) -> &CandidateSet {
        &self.alphabet
    }

    pub fn letter(&self, i: usize) -> Candidate {
        Candidate::new(self.letters[i] as usize)
    }

    pub fn to_text(&self) -> String {
        self.alphabet
            .word(self.letters.iter().map(|&l| Candidate::new(l as usize)))
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> WinnersWord {
        WinnersWord {
            letters: self.letters[range].to_vec(),
            alphabet: self.alphabet.clone(),
        }
    }
}

/// Letter `k` is the winner at `Φ^k(s0)`, for `k < n`.
pub fn winners_word<D: Dynamics>(map: &D, s0: &D::State, n: usize) -> WinnersWord {
    let mut letters = Vec::with_capacity(n);
    let mut s = s0.clone();
    for k in 0..n {
        letters.push(map.winner(&s));
        if k + 1 < n {
            s = map.step(&s);
        }
    }
    WinnersWord::new(map.candidates().clone(), letters)
}

/// Length-`ell` factors of a prefix, each with its first position and count.
#[derive(Clone, Debug, PartialEq)]
pub struct Census {
    pub ell: usize,
    pub n_windows: usize,
    entries: Vec<(usize, usize)>,
}

impl Census {
    /// `S^ℓ`
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn counts(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.n_windows as f64;
        self.counts().map(|c| c as f64 / n).collect()
    }

    /// Subwords as text with their counts, sorted by text.
    pub fn words(&self, w: &WinnersWord) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = self
            .entries
            .iter()
            .map(|&(start, count)| (w.slice(start..start + self.ell).to_text(), count))
            .collect();
        out.sort();
        out
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.probabilities()).expect("census frequencies form a distribution")
    }
}

const MERSENNE_61: u64 = (1 << 61) - 1;
const BASE: u64 = 0x1f3d_5b79_a2c4_e681 % MERSENNE_61;

fn mulmod(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let r = (p & MERSENNE_61 as u128) as u64 + (p >> 61) as u64;
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

/// Counts the windows of length `ell` in `w[..n]`. Fingerprints are
/// polynomial hashes modulo 2⁶¹−1; collisions are resolved by comparing
/// letters.
pub fn subword_census(w: &WinnersWord, ell: usize, n: usize) -> Result<Census> {
    if ell == 0 || ell > n || n > w.len() {
        return Err(Error::invalid(format!(
            "need 1 <= ell <= n <= {}, got ell = {ell}, n = {n}",
            w.len()
        )));
    }
    let x = &w.letters[..n];
    let mut top = 1;
    for _ in 1..ell {
        top = mulmod(top, BASE);
    }
    let mut h = 0;
    for &l in &x[..ell] {
        h = (mulmod(h, BASE) + l as u64 + 1) % MERSENNE_61;
    }
    let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut entries: Vec<(usize, usize)> = Vec::new();
    let n_windows = n - ell + 1;
    for start in 0..n_windows {
        if start > 0 {
            let out = mulmod(x[start - 1] as u64 + 1, top);
            h = (h + MERSENNE_61 - out) % MERSENNE_61;
            h = (mulmod(h, BASE) + x[start + ell - 1] as u64 + 1) % MERSENNE_61;
        }
        let window = &x[start..start + ell];
        let bucket = buckets.entry(h).or_default();
        match bucket.iter().find(|&&e| &x[entries[e].0..entries[e].0 + ell] == window) {
            Some(&e) => entries[e].1 += 1,
            None => {
                bucket.push(entries.len());
                entries.push((start, 1));
            }
        }
    }
    Ok(Census {
        ell,
        n_windows,
        entries,
    })
}

/// `Σ -p log p` in nats, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64> {
    if let Some(&bad) = p.iter().find(|&&x| !x.is_finite() || x < 0.0) {
        return Err(Error::invalid(format!("probabilities must be non-negative, got {bad}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
    }
    Ok(p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProfileRow {
    pub ell: usize,
    pub distinct: usize,
    /// `log S^ℓ`
    pub log_distinct: f64,
    /// `H(P^ℓ)`
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub n: usize,
    pub rows: Vec<ProfileRow>,
    /// `S^ℓ` at the longest length exceeds a tenth of the window count, so
    /// block frequencies are poorly sampled.
    pub undersampled: bool,
}

/// Both entropy profiles for `ℓ = 1 ..= ell_max` over the first `n` letters.
pub fn ks_profile(w: &WinnersWord, n: usize, ell_max: usize, exec: Execution) -> Result<Profile> {
    if ell_max == 0 || ell_max > n || n > w.len() {
        return Err(Error::invalid(format!(
            "need 1 <= ell_max <= n <= {}, got ell_max = {ell_max}, n = {n}",
            w.len()
        )));
    }
    let rows = exec
        .map_collect(ell_max, |i| {
            let c = subword_census(w, i + 1, n)?;
            Ok(ProfileRow {
                ell: i + 1,
                distinct: c.distinct(),
                log_distinct: (c.distinct() as f64).ln(),
                entropy: c.entropy(),
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let last = rows.last().unwrap();
    let undersampled = last.distinct * 10 > n - ell_max + 1;
    Ok(Profile { n, rows, undersampled })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals.
    pub residual: f64,
    /// Points are not well aligned: `residual >= 0.02`.
    pub low_confidence: bool,
    /// Slope below 0.01 with `S^ℓ` constant over the fit range.
    pub eventually_periodic_suspected: bool,
}

pub const ALIGNMENT_TOLERANCE: f64 = 0.02;

/// Least-squares line through `(ℓ, H(P^ℓ))` for `ℓ` in `lo ..= hi`.
pub fn ks_entropy_estimate(profile: &Profile, lo: usize, hi: usize) -> Result<EntropyFit> {
    let pts: Vec<&ProfileRow> = profile.rows.iter().filter(|r| r.ell >= lo && r.ell <= hi).collect();
    if lo > hi || pts.len() < 3 || pts.len() != hi - lo + 1 {
        return Err(Error::invalid(format!(
            "fit range {lo}:{hi} must hold at least 3 lengths of the profile"
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|r| r.ell as f64).sum::<f64>() / k;
    let my = pts.iter().map(|r| r.entropy).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|r| (r.ell as f64 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|r| (r.ell as f64 - mx) * (r.entropy - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|r| (r.entropy - intercept - slope * r.ell as f64).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    let constant = pts.windows(2).all(|w| w[0].distinct == w[1].distinct);
    Ok(EntropyFit {
        slope,
        intercept,
        residual,
        low_confidence: residual >= ALIGNMENT_TOLERANCE,
        eventually_periodic_suspected: slope < 0.01 && constant,
    })
}

/// Smallest period `p` and then smallest preperiod `t` such that
/// `w[i] = w[i + p]` for every `i ≥ t`, with both at most a third of the
/// word.
pub fn detect_eventual_period(w: &WinnersWord) -> Option<(usize, usize)> {
    let x = w.letters();
    let len = x.len();
    let bound = len / 3;
    for p in 1..=bound {
        // scan backwards; stop as soon as the preperiod would exceed the bound
        let mut t = len - p;
        while t > 0 && x[t - 1] == x[t - 1 + p] {
            t -= 1;
        }
        if t <= bound {
            return Some((t, p));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PERIOD_22: &str = "aaacacaaacacacacaaaaaa";

    fn word(s: &str) -> WinnersWord {
        WinnersWord::from_text(s).unwrap()
    }

    fn coin(n: usize, seed: u64) -> WinnersWord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let set = CandidateSet::alphabetic(2).unwrap();
        WinnersWord::new(set, (0..n).map(|_| Candidate::new(rng.random_range(0..2))))
    }

    /// Naive census oracle.
    fn naive(s: &str, ell: usize) -> Vec<(String, usize)> {
        let mut m: HashMap<&str, usize> = HashMap::new();
        for i in 0..=s.len() - ell {
            *m.entry(&s[i..i + ell]).or_default() += 1;
        }
        let mut v: Vec<(String, usize)> = m.into_iter().map(|(k, c)| (k.to_string(), c)).collect();
        v.sort();
        v
    }

    #[test]
    fn census_examples() {
        let w = word(&"a".repeat(50));
        for ell in 1..10 {
            assert_eq!(subword_census(&w, ell, 50).unwrap().distinct(), 1);
        }
        let w = word(&"ab".repeat(20));
        let c = subword_census(&w, 2, 10).unwrap();
        assert_eq!(c.words(&w), vec![("ab".to_string(), 5), ("ba".to_string(), 4)]);
        assert!(subword_census(&w, 11, 10).is_err());
    }

    #[test]
    fn census_matches_naive_count() {
        let text = "abcacbbacabcbabcaabcbcacbabcabbbcacacbabc".repeat(3);
        let w = word(&text);
        for ell in 1..12 {
            let c = subword_census(&w, ell, text.len()).unwrap();
            assert_eq!(c.words(&w), naive(&text, ell));
        }
    }

    #[test]
    fn period_22_word_census() {
        let text = PERIOD_22.repeat(100);
        let w = word(&text);
        let expected = [2, 3, 5, 7, 10, 13, 17, 21, 22, 22, 22, 22, 22, 22, 22];
        for (ell, &s) in (1..=15).zip(&expected) {
            assert_eq!(subword_census(&w, ell, w.len()).unwrap().distinct(), s, "ell={ell}");
        }
        let prof = ks_profile(&w, w.len(), 16, Execution::Sequential).unwrap();
        for r in &prof.rows[9..] {
            assert!((r.entropy - 22f64.ln()).abs() < 1e-3);
        }
        let fit = ks_entropy_estimate(&prof, 10, 16).unwrap();
        assert!(fit.slope.abs() < 0.01);
        assert!(fit.eventually_periodic_suspected);
        assert_eq!(detect_eventual_period(&w), Some((0, 22)));
    }

    #[test]
    fn entropy_values() {
        assert_eq!(shannon_entropy(&[1.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.5, 0.5]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((shannon_entropy(&[0.25; 4]).unwrap() - 4f64.ln()).abs() < 1e-15);
        assert_eq!(
            shannon_entropy(&[0.2, 0.8, 0.0, 0.0]).unwrap(),
            shannon_entropy(&[0.2, 0.8]).unwrap()
        );
        assert!(shannon_entropy(&[1.5, -0.5]).is_err());
        assert!(shannon_entropy(&[0.3, 0.3]).is_err());
    }

    #[test]
    fn constant_word_profiles_vanish() {
        let w = word(&"c".repeat(1000));
        let p = ks_profile(&w, 1000, 8, Execution::Parallel).unwrap();
        assert!(p.rows.iter().all(|r| r.entropy == 0.0 && r.log_distinct == 0.0));
    }

    #[test]
    fn fair_coin_profile() {
        let w = coin(1 << 20, 99);
        let p = ks_profile(&w, w.len(), 12, Execution::Parallel).unwrap();
        for r in &p.rows {
            let ideal = r.ell as f64 * 2f64.ln();
            assert!((r.entropy - ideal).abs() < 0.01 * ideal, "ell={}", r.ell);
        }
        assert_eq!(detect_eventual_period(&w), None);
    }

    #[test]
    fn linear_fit_is_exact() {
        let rows = (1..=10)
            .map(|ell| ProfileRow {
                ell,
                distinct: ell,
                log_distinct: 0.0,
                entropy: 0.3 * ell as f64,
            })
            .collect();
        let p = Profile {
            n: 100,
            rows,
            undersampled: false,
        };
        let fit = ks_entropy_estimate(&p, 2, 9).unwrap();
        assert!((fit.slope - 0.3).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!(!fit.low_confidence);
        assert!(ks_entropy_estimate(&p, 4, 5).is_err());
        assert!(ks_entropy_estimate(&p, 8, 12).is_err());
    }

    #[test]
    fn eventual_period_detection() {
        assert_eq!(detect_eventual_period(&word(&"ac".repeat(30))), Some((0, 2)));
        let w = word(&format!("ba{}", "abc".repeat(20)));
        assert_eq!(detect_eventual_period(&w), Some((2, 3)));
        assert_eq!(detect_eventual_period(&word("abcabd")), None);
    }
}
