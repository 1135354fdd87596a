//! Text format for electorates.
//!
//! ```text
//! # comment
//! candidates: a b c
//! type Z: a>b>c 101
//! type W: c>a=b 104 MLR
//! ```
//!
//! `>` separates tie-groups and `=` joins tied candidates. The strategy is
//! `LR` or `MLR` and defaults to `MLR`.

use std::collections::HashSet;

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::model::{Candidate, CandidateSet, Electorate, Preference, VoterType};
use crate::strategy::StrategyTag;

struct Cursor<'a> {
    line: usize,
    chars: Vec<(usize, char)>,
    pos: usize,
    text: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Cursor {
            line,
            chars: text.char_indices().collect(),
            pos: 0,
            text,
        }
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn err(&self, column: usize, kind: ParseErrorKind) -> Error {
        Error::Parse(ParseError {
            line: self.line,
            column,
            kind,
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn rest(&self) -> &'a str {
        match self.chars.get(self.pos) {
            Some(&(b, _)) => &self.text[b..],
            None => "",
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.rest().starts_with(kw) {
            self.pos += kw.chars().count();
            true
        } else {
            false
        }
    }

    /// A run of characters other than whitespace and `>=:#`.
    fn name(&mut self, what: &'static str) -> Result<(usize, &'a str)> {
        let col = self.column();
        let start = self.pos;
        while self.peek().is_some_and(|c| !c.is_whitespace() && !">=:#".contains(c)) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(col, ParseErrorKind::Expected(what)));
        }
        Ok((col, self.slice(start, self.pos)))
    }

    fn token(&mut self) -> (usize, &'a str) {
        let col = self.column();
        let start = self.pos;
        while self.peek().is_some_and(|c| !c.is_whitespace()) {
            self.pos += 1;
        }
        (col, self.slice(start, self.pos))
    }

    fn slice(&self, from: usize, to: usize) -> &'a str {
        let b = self.chars.get(from).map_or(self.text.len(), |c| c.0);
        let e = self.chars.get(to).map_or(self.text.len(), |c| c.0);
        &self.text[b..e]
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

pub fn parse_electorate(text: &str) -> Result<Electorate> {
    let mut candidates: Option<CandidateSet> = None;
    let mut types: Vec<VoterType> = Vec::new();
    let mut type_names = HashSet::new();

    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        let mut cur = Cursor::new(i + 1, line);
        cur.skip_ws();
        if cur.at_end() {
            continue;
        }
        let col = cur.column();
        if cur.eat_keyword("candidates:") {
            if candidates.is_some() {
                return Err(cur.err(col, ParseErrorKind::CandidatesRedeclared));
            }
            let mut names: Vec<String> = Vec::new();
            loop {
                cur.skip_ws();
                if cur.at_end() {
                    break;
                }
                let (c, name) = cur.name("a candidate name")?;
                if names.iter().any(|n| n == name) {
                    return Err(cur.err(c, ParseErrorKind::DuplicateCandidate(name.into())));
                }
                names.push(name.into());
            }
            candidates =
                Some(CandidateSet::new(names).map_err(|e| cur.err(col, ParseErrorKind::Invalid(e.to_string())))?);
        } else if cur.eat_keyword("type") && cur.peek().is_some_and(char::is_whitespace) {
            let set = candidates
                .as_ref()
                .ok_or_else(|| cur.err(col, ParseErrorKind::CandidatesNotDeclared))?;
            types.push(parse_type(&mut cur, set, &mut type_names)?);
        } else {
            return Err(cur.err(col, ParseErrorKind::Expected("`candidates:` or `type`")));
        }
    }

    let set = candidates.ok_or_else(|| {
        Error::Parse(ParseError {
            line: text.lines().count().max(1),
            column: 1,
            kind: ParseErrorKind::Expected("a `candidates:` declaration"),
        })
    })?;
    Electorate::new(set, types)
}

fn parse_type(cur: &mut Cursor<'_>, set: &CandidateSet, seen: &mut HashSet<String>) -> Result<VoterType> {
    cur.skip_ws();
    let (name_col, name) = cur.name("a voter type name")?;
    if !seen.insert(name.to_string()) {
        return Err(cur.err(name_col, ParseErrorKind::DuplicateType(name.into())));
    }
    cur.skip_ws();
    if !cur.eat(':') {
        return Err(cur.err(cur.column(), ParseErrorKind::Expected("`:` after the type name")));
    }
    cur.skip_ws();
    let pref_col = cur.column();
    let mut groups: Vec<Vec<Candidate>> = Vec::new();
    let mut used = vec![false; set.len()];
    loop {
        let mut group = Vec::new();
        loop {
            cur.skip_ws();
            let (c, n) = cur.name("a candidate name")?;
            let cand = set
                .get(n)
                .ok_or_else(|| cur.err(c, ParseErrorKind::UnknownCandidate(n.into())))?;
            if std::mem::replace(&mut used[cand.index()], true) {
                return Err(cur.err(c, ParseErrorKind::RepeatedCandidate(n.into())));
            }
            group.push(cand);
            cur.skip_ws();
            if !cur.eat('=') {
                break;
            }
        }
        groups.push(group);
        if !cur.eat('>') {
            break;
        }
    }
    let missing: Vec<String> = set
        .iter()
        .filter(|c| !used[c.index()])
        .map(|c| set.name(c).to_string())
        .collect();
    if !missing.is_empty() {
        return Err(cur.err(pref_col, ParseErrorKind::IncompletePreference(missing)));
    }
    let preference = Preference::from_groups(set.len(), groups)?;

    cur.skip_ws();
    let (wcol, wtext) = cur.token();
    if wtext.is_empty() {
        return Err(cur.err(wcol, ParseErrorKind::Expected("a weight")));
    }
    let weight: f64 = wtext
        .parse()
        .ok()
        .filter(|w: &f64| w.is_finite())
        .ok_or_else(|| cur.err(wcol, ParseErrorKind::MalformedNumber(wtext.into())))?;
    if weight < 0.0 {
        return Err(cur.err(wcol, ParseErrorKind::NegativeWeight(wtext.into())));
    }

    cur.skip_ws();
    let mut strategy = StrategyTag::ModifiedLeaderRule;
    if !cur.at_end() {
        let (scol, stext) = cur.token();
        strategy = match stext {
            "LR" | "lr" => StrategyTag::LeaderRule,
            "MLR" | "mlr" => StrategyTag::ModifiedLeaderRule,
            _ => return Err(cur.err(scol, ParseErrorKind::UnknownStrategy(stext.into()))),
        };
        if strategy == StrategyTag::LeaderRule && !preference.is_tie_free() {
            return Err(cur.err(scol, ParseErrorKind::TiedLeaderRule));
        }
        cur.skip_ws();
        if !cur.at_end() {
            let col = cur.column();
            return Err(cur.err(col, ParseErrorKind::Trailing(cur.rest().trim_end().into())));
        }
    }
    Ok(VoterType::new(name, preference, weight, strategy))
}

/// Inverse of [`parse_electorate`]; the default strategy is omitted.
pub fn serialize_electorate(e: &Electorate) -> String {
    let set = e.candidates();
    let mut out = format!("candidates: {}\n", set.names().join(" "));
    for t in e.types() {
        let pref: Vec<String> = t
            .preference
            .groups()
            .iter()
            .map(|g| g.iter().map(|&c| set.name(c)).collect::<Vec<_>>().join("="))
            .collect();
        out.push_str(&format!("type {}: {} {}", t.name, pref.join(">"), t.weight));
        if t.strategy == StrategyTag::LeaderRule {
            out.push_str(" LR");
        }
        out.push('\n');
    }
    out
}
