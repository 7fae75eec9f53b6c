//! Rule-driven extraction of profiled relations from export lines.
//!
//! Each rule is a regular expression with two capture groups plus an anchor,
//! the text whose left context decides between the affirmative and negative
//! relation type.

use log::{debug, warn};
use regex::Regex;

use crate::corpus::ExportRecord;
use crate::error::{ExtractError, ParseError};
use crate::profile::ProfileVocabulary;
use crate::relation::{check_param, RawRelation, TypeRegistry};
use crate::resources::{data_lines, Lang};

pub const DEFAULT_NEGATION_WINDOW: usize = 3;

#[derive(Debug, Clone)]
pub struct ExtractionRule {
    pub pattern: Regex,
    pub rtype: String,
    pub anchor: String,
}

impl ExtractionRule {
    pub fn new(pattern: &str, rtype: &str, anchor: &str) -> Result<Self, String> {
        let pattern = Regex::new(pattern).map_err(|e| e.to_string())?;
        let groups = pattern.captures_len() - 1;
        if groups != 2 {
            return Err(format!("pattern needs exactly 2 capture groups, has {groups}"));
        }
        if anchor.split_whitespace().next().is_none() {
            return Err("empty anchor".into());
        }
        Ok(Self { pattern, rtype: rtype.to_string(), anchor: anchor.to_string() })
    }
}

/// Parses `pattern<TAB>type<TAB>anchor` records.
pub fn parse_rules(text: &str) -> Result<Vec<ExtractionRule>, ExtractError> {
    data_lines(text)
        .map(|(n, line)| {
            let bad = |reason: String| ExtractError::BadRule { index: n, reason };
            let fields: Vec<&str> = line.split('\t').collect();
            let [pattern, rtype, anchor] = fields.as_slice() else {
                return Err(bad(format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            ExtractionRule::new(pattern, rtype, anchor).map_err(bad)
        })
        .collect()
}

/// Negative adverbs and adverbial phrases, matched longest first.
#[derive(Debug, Clone, Default)]
pub struct NegationLexicon {
    phrases: Vec<Vec<String>>,
}

impl NegationLexicon {
    pub fn parse(text: &str) -> Self {
        let mut phrases: Vec<Vec<String>> = data_lines(text)
            .map(|(_, l)| l.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>())
            .filter(|p| !p.is_empty())
            .collect();
        phrases.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        phrases.dedup();
        Self { phrases }
    }

    pub fn bundled(lang: Lang) -> Self {
        Self::parse(lang.negation())
    }

    /// Start and length of the first (longest) phrase found inside `window`.
    fn find(&self, window: &[String]) -> Option<(usize, usize)> {
        self.phrases
            .iter()
            .find_map(|p| window.windows(p.len()).position(|w| w == p.as_slice()).map(|at| (at, p.len())))
    }
}

/// Outcome of a rule match before the relation is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatch {
    pub param1: String,
    pub param2: String,
    pub negated: bool,
}

#[derive(Debug, Clone)]
pub struct Extractor {
    rules: Vec<ExtractionRule>,
    negation: NegationLexicon,
    types: TypeRegistry,
    window: usize,
}

impl Extractor {
    /// Rules naming unregistered or negative types are refused.
    pub fn new(
        rules: Vec<ExtractionRule>,
        negation: NegationLexicon,
        types: TypeRegistry,
    ) -> Result<Self, ExtractError> {
        for (n, rule) in rules.iter().enumerate() {
            match types.get(&rule.rtype) {
                Some(t) if !t.is_negative() => {}
                Some(_) => {
                    return Err(ExtractError::BadRule {
                        index: n + 1,
                        reason: format!("`{}` is a negative type", rule.rtype),
                    })
                }
                None => {
                    return Err(ExtractError::BadRule {
                        index: n + 1,
                        reason: format!("unknown relation type `{}`", rule.rtype),
                    })
                }
            }
        }
        Ok(Self { rules, negation, types, window: DEFAULT_NEGATION_WINDOW })
    }

    pub fn bundled(lang: Lang, types: TypeRegistry) -> Result<Self, ExtractError> {
        Self::new(parse_rules(lang.rules())?, NegationLexicon::bundled(lang), types)
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn rules(&self) -> &[ExtractionRule] {
        &self.rules
    }

    pub fn types(&self) -> &TypeRegistry {
        &self.types
    }

    /// Every rule that matches the record contributes one relation.
    pub fn extract(&self, rec: &ExportRecord) -> Vec<RawRelation> {
        let sentence = prepare_sentence(&rec.text);
        let mut out = Vec::new();
        for rule in &self.rules {
            let Some(m) = self.apply(rule, &sentence) else {
                continue;
            };
            if let Err(e) = check_param(&m.param1).and_then(|_| check_param(&m.param2)) {
                warn!("statement {}: {e}", rec.id);
                continue;
            }
            out.push(RawRelation {
                rtype: self.resolve_polarity(rule, m.negated),
                param1: m.param1,
                param2: m.param2,
                profile: rec.profile.clone(),
                id: rec.id,
            });
        }
        if out.is_empty() {
            debug!("statement {} matched no extraction rule", rec.id);
        }
        out
    }

    pub fn extract_line(&self, line: &str, vocab: &ProfileVocabulary) -> Result<Vec<RawRelation>, ParseError> {
        Ok(self.extract(&ExportRecord::parse(line, vocab)?))
    }

    /// Extracts a whole export file, keeping the order of its lines.
    pub fn extract_corpus(&self, records: &[ExportRecord]) -> Vec<RawRelation> {
        records.iter().flat_map(|r| self.extract(r)).collect()
    }

    /// Matches one rule against a prepared sentence, deciding negation from
    /// the tokens just before the anchor.
    pub fn apply(&self, rule: &ExtractionRule, sentence: &str) -> Option<RuleMatch> {
        let tokens: Vec<&str> = sentence.split(' ').collect();
        let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
        let anchor: Vec<String> = rule.anchor.split_whitespace().map(str::to_lowercase).collect();
        for at in occurrences(&lowered, &anchor) {
            let start = at.saturating_sub(self.window);
            let mut window_start = start;
            for (k, tok) in lowered.iter().enumerate().take(at).skip(start) {
                if tok.ends_with([',', ';', ':']) {
                    window_start = k + 1;
                }
            }
            let window: Vec<String> = lowered[window_start..at]
                .iter()
                .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_string())
                .collect();
            let (candidate, negated) = match self.negation.find(&window) {
                Some((pos, len)) => {
                    let from = window_start + pos;
                    let kept: Vec<&str> = tokens[..from].iter().chain(&tokens[from + len..]).copied().collect();
                    (kept.join(" "), true)
                }
                None => (sentence.to_string(), false),
            };
            if let Some(m) = captures(rule, &candidate, negated) {
                return Some(m);
            }
        }
        captures(rule, sentence, false)
    }

    /// Negative counterpart when negated; k-line types stay affirmative.
    pub fn resolve_polarity(&self, rule: &ExtractionRule, negated: bool) -> String {
        if !negated {
            return rule.rtype.clone();
        }
        match self.types.negative_of(&rule.rtype) {
            Some(neg) => neg.name.clone(),
            None => {
                warn!("`{}` has no negative form; keeping the affirmative type", rule.rtype);
                rule.rtype.clone()
            }
        }
    }
}

fn captures(rule: &ExtractionRule, text: &str, negated: bool) -> Option<RuleMatch> {
    let caps = rule.pattern.captures(text)?;
    let p1 = caps.get(1)?.as_str().trim();
    let p2 = caps.get(2)?.as_str().trim();
    if p1.is_empty() || p2.is_empty() {
        return None;
    }
    Some(RuleMatch { param1: p1.to_string(), param2: p2.to_string(), negated })
}

fn occurrences(tokens: &[String], needle: &[String]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > tokens.len() {
        return Vec::new();
    }
    tokens.windows(needle.len()).enumerate().filter(|(_, w)| *w == needle).map(|(i, _)| i).collect()
}

/// Trims, drops a final period, collapses whitespace and lowercases a
/// sentence-initial capital (`Um(a)`, `Você`, `Pessoas`) so rules can be
/// written in lowercase.
pub fn prepare_sentence(text: &str) -> String {
    let text = text.trim();
    let text = text.strip_suffix('.').unwrap_or(text);
    let mut words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
    if let Some(first) = words.first_mut() {
        let mut chars = first.chars();
        if let Some(c) = chars.next() {
            let rest = chars.as_str();
            if c.is_uppercase() && !rest.chars().any(char::is_uppercase) {
                *first = c.to_lowercase().chain(rest.chars()).collect();
            }
        }
    }
    words.join(" ")
}
