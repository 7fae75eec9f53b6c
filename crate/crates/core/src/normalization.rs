//! Tagging, article removal, clitic rewriting and lemmatization.
//!
//! The morphology backend is a trait so a full inflectional dictionary can be
//! dropped in; [`LexiconMorphology`] is the table-driven implementation that
//! ships with bundled English and Portuguese mini-lexicons.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relation::RawRelation;
use crate::resources::{data_lines, Lang};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Subst,
    Verb,
    Adj,
    Prep,
    Art,
    Pron,
    Adv,
    Propn,
    Other,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Subst => "SUBST",
            Tag::Verb => "VERB",
            Tag::Adj => "ADJ",
            Tag::Prep => "PREP",
            Tag::Art => "ART",
            Tag::Pron => "PRON",
            Tag::Adv => "ADV",
            Tag::Propn => "PROPN",
            Tag::Other => "OTHER",
        }
    }
}

impl FromStr for Tag {
    type Err = LexiconError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "SUBST" => Tag::Subst,
            "VERB" => Tag::Verb,
            "ADJ" => Tag::Adj,
            "PREP" => Tag::Prep,
            "ART" => Tag::Art,
            "PRON" => Tag::Pron,
            "ADV" => Tag::Adv,
            "PROPN" => Tag::Propn,
            "OTHER" => Tag::Other,
            other => return Err(LexiconError::UnknownTag(other.to_string())),
        })
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Order used to resolve tokens the lexicon lists under several tags.
pub const DEFAULT_TAG_PRIORITY: [Tag; 7] = [Tag::Verb, Tag::Subst, Tag::Adj, Tag::Adv, Tag::Prep, Tag::Pron, Tag::Art];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexiconError {
    #[error("unknown tag `{0}`")]
    UnknownTag(String),
    #[error("line {0}: expected `surface<TAB>lemma<TAB>tag`")]
    Syntax(usize),
    #[error("clitic rule line {0}: expected `suffix<TAB>replacement`")]
    CliticSyntax(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedToken {
    pub surface: String,
    pub lemma: String,
    pub tag: Tag,
}

impl TaggedToken {
    /// `lemma/TAG`
    pub fn tagged(&self) -> String {
        format!("{}/{}", self.lemma, self.tag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliticRule {
    pub suffix: String,
    pub replacement: String,
}

/// Morphological analysis backend.
pub trait MorphologyProvider: Send + Sync {
    /// Tags every token. Unknown tokens come back as `OTHER` (or `PROPN` when
    /// capitalized) with `lemma == surface`.
    fn tag(&self, text: &str) -> Vec<TaggedToken>;

    /// Dictionary normal form of `surface` under `tag`.
    fn lookup(&self, surface: &str, tag: Tag) -> Option<String>;

    fn clitic_rules(&self) -> &[CliticRule];

    /// Whether the word form is known at all, under any tag.
    fn knows(&self, surface: &str) -> bool;
}

/// Table-driven tagger and lemmatizer backed by an inflectional lexicon file.
#[derive(Debug, Clone)]
pub struct LexiconMorphology {
    entries: HashMap<String, Vec<(String, Tag)>>,
    priority: Vec<Tag>,
    clitics: Vec<CliticRule>,
}

impl LexiconMorphology {
    /// Loads `surface<TAB>lemma<TAB>tag` records and `suffix<TAB>replacement` clitic rules.
    pub fn parse(lexicon: &str, clitics: &str) -> Result<Self, LexiconError> {
        let mut entries: HashMap<String, Vec<(String, Tag)>> = HashMap::new();
        for (n, line) in data_lines(lexicon) {
            let mut fields = line.split('\t');
            let (Some(surface), Some(lemma), Some(tag), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(LexiconError::Syntax(n));
            };
            if surface.is_empty() || lemma.is_empty() {
                return Err(LexiconError::Syntax(n));
            }
            let tag: Tag = tag.trim().parse()?;
            let slot = entries.entry(surface.to_string()).or_default();
            if !slot.iter().any(|(l, t)| l == lemma && *t == tag) {
                slot.push((lemma.to_string(), tag));
            }
        }
        let mut rules = Vec::new();
        for (n, line) in data_lines(clitics) {
            let (suffix, replacement) = line.split_once('\t').ok_or(LexiconError::CliticSyntax(n))?;
            if suffix.is_empty() {
                return Err(LexiconError::CliticSyntax(n));
            }
            rules.push(CliticRule { suffix: suffix.to_string(), replacement: replacement.to_string() });
        }
        Ok(Self { entries, priority: DEFAULT_TAG_PRIORITY.to_vec(), clitics: rules })
    }

    pub fn bundled(lang: Lang) -> Self {
        Self::parse(lang.lexicon(), lang.clitics()).expect("bundled lexicon parses")
    }

    pub fn with_priority(mut self, priority: Vec<Tag>) -> Self {
        self.priority = priority;
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn rank(&self, tag: Tag) -> usize {
        self.priority.iter().position(|t| *t == tag).unwrap_or(self.priority.len())
    }

    /// Exact-case match, so a capitalized form the lexicon lists only in
    /// lowercase (`São` vs the verb `são`) is left to the proper-name rule.
    fn best_tag(&self, surface: &str) -> Option<Tag> {
        self.entries.get(surface)?.iter().map(|(_, t)| *t).min_by_key(|t| self.rank(*t))
    }
}

impl MorphologyProvider for LexiconMorphology {
    fn tag(&self, text: &str) -> Vec<TaggedToken> {
        tokenize(text)
            .into_iter()
            .map(|tok| {
                if let Some((surface, tag)) = split_tagged(tok) {
                    return TaggedToken { surface: surface.to_string(), lemma: surface.to_string(), tag };
                }
                let tag = self.best_tag(tok).unwrap_or_else(|| {
                    if tok.chars().next().is_some_and(char::is_uppercase) {
                        Tag::Propn
                    } else {
                        Tag::Other
                    }
                });
                TaggedToken { surface: tok.to_string(), lemma: tok.to_string(), tag }
            })
            .collect()
    }

    fn lookup(&self, surface: &str, tag: Tag) -> Option<String> {
        self.entries
            .get(surface)
            .or_else(|| self.entries.get(&surface.to_lowercase()))?
            .iter()
            .find(|(_, t)| *t == tag)
            .map(|(l, _)| l.clone())
    }

    fn clitic_rules(&self) -> &[CliticRule] {
        &self.clitics
    }

    fn knows(&self, surface: &str) -> bool {
        self.entries.contains_key(surface) || self.entries.contains_key(&surface.to_lowercase())
    }
}

/// Whitespace tokens with sentence punctuation trimmed from both ends.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | '"')))
        .filter(|t| !t.is_empty())
        .collect()
}

/// Splits a `word/TAG` token when the suffix is a known tag.
pub fn split_tagged(token: &str) -> Option<(&str, Tag)> {
    let (word, tag) = token.rsplit_once('/')?;
    if word.is_empty() {
        return None;
    }
    tag.parse().ok().map(|t| (word, t))
}

/// Drops `/TAG` suffixes: `mesa/SUBST de/PREP escritório/SUBST` becomes `mesa de escritório`.
pub fn strip_tags(phrase: &str) -> String {
    phrase.split_whitespace().map(|t| split_tagged(t).map_or(t, |(w, _)| w)).collect::<Vec<_>>().join(" ")
}

/// Tags of a tagged phrase; `None` for any untagged token.
pub fn phrase_tags(phrase: &str) -> Vec<Option<Tag>> {
    phrase.split_whitespace().map(|t| split_tagged(t).map(|(_, tag)| tag)).collect()
}

/// Counters reported after a normalization run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub tokens: usize,
    pub misses: usize,
    pub articles_removed: usize,
    pub clitics_rewritten: usize,
}

impl NormalizationStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain counters serialize")
    }
}

pub fn normalize_phrase(text: &str, provider: &dyn MorphologyProvider) -> Vec<TaggedToken> {
    normalize_phrase_with_stats(text, provider, &mut NormalizationStats::default())
}

pub fn normalize_phrase_with_stats(
    text: &str,
    provider: &dyn MorphologyProvider,
    stats: &mut NormalizationStats,
) -> Vec<TaggedToken> {
    let tagged = provider.tag(text);
    stats.tokens += tagged.len();
    let mut out = Vec::with_capacity(tagged.len());
    for mut tok in tagged {
        match tok.tag {
            Tag::Art => {
                stats.articles_removed += 1;
                continue;
            }
            Tag::Propn => {
                tok.lemma = tok.surface.clone();
                out.push(tok);
                continue;
            }
            _ => {}
        }
        let mut form = tok.surface.clone();
        if matches!(tok.tag, Tag::Other | Tag::Verb) && form.contains('-') {
            if let Some(rewritten) = rewrite_clitic(&form, provider.clitic_rules()) {
                stats.clitics_rewritten += 1;
                form = rewritten;
                tok.tag = Tag::Verb;
            }
        }
        tok.lemma = match provider.lookup(&form, tok.tag) {
            Some(lemma) => lemma,
            None => {
                stats.misses += 1;
                form
            }
        };
        out.push(tok);
    }
    out
}

fn rewrite_clitic(word: &str, rules: &[CliticRule]) -> Option<String> {
    let lower = word.to_lowercase();
    rules.iter().find_map(|r| {
        let stem = lower.strip_suffix(r.suffix.as_str())?;
        (!stem.is_empty()).then(|| format!("{stem}{}", r.replacement))
    })
}

/// `lemma/TAG` tokens joined by spaces.
pub fn tagged_phrase(tokens: &[TaggedToken]) -> String {
    tokens.iter().map(TaggedToken::tagged).collect::<Vec<_>>().join(" ")
}

/// Lemmas joined by spaces.
pub fn lemma_phrase(tokens: &[TaggedToken]) -> String {
    tokens.iter().map(|t| t.lemma.as_str()).collect::<Vec<_>>().join(" ")
}

/// Replaces both parameters by their tagged normal forms. Profile and id pass through.
pub fn normalize_relation(
    raw: &RawRelation,
    provider: &dyn MorphologyProvider,
    stats: &mut NormalizationStats,
) -> RawRelation {
    let mut norm = |p: &str| {
        let tokens = normalize_phrase_with_stats(p, provider, stats);
        if tokens.is_empty() {
            // a phrase made only of articles keeps its original text
            p.to_string()
        } else {
            tagged_phrase(&tokens)
        }
    };
    RawRelation {
        rtype: raw.rtype.clone(),
        param1: norm(&raw.param1),
        param2: norm(&raw.param2),
        profile: raw.profile.clone(),
        id: raw.id,
    }
}
