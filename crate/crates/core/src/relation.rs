//! Relation types, relations, and their line-oriented text formats.
//!
//! Three line shapes share one tokenizer:
//!
//! ```text
//! (UsedFor "computer" "study" "f=3;i=2" "1;55;346;550;555")                         final
//! (UsedFor "computador" "estudar" "M" "18_29" "mestrado" "Clementina" "SP" "1")     extracted
//! (UsedFor "computador/SUBST" "jogar/VERB" "M" "13_17" "2_incompleto" "São Carlos" "SP" "25;387" "f=2;i=0")
//! ```
//!
//! The last shape is the relaxed intermediate form: profile slots, then ids, then counters.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ParseError, RegistryError};
use crate::profile::{ProfileAttrs, ProfileVocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Affirmative,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationType {
    pub name: String,
    pub polarity: Polarity,
    /// Set on negative types only.
    pub affirmative_counterpart: Option<String>,
    pub kline: bool,
}

impl RelationType {
    pub fn affirmative(name: &str) -> Self {
        Self { name: name.to_string(), polarity: Polarity::Affirmative, affirmative_counterpart: None, kline: false }
    }

    pub fn kline(name: &str) -> Self {
        Self { kline: true, ..Self::affirmative(name) }
    }

    pub fn negative(name: &str, counterpart: &str) -> Self {
        Self {
            name: name.to_string(),
            polarity: Polarity::Negative,
            affirmative_counterpart: Some(counterpart.to_string()),
            kline: false,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.polarity == Polarity::Negative
    }
}

/// Affirmative types shipped by default. The full set of twenty lives in
/// `data/relation_types.txt`.
pub const DEFAULT_AFFIRMATIVES: &[&str] =
    &["IsA", "PropertyOf", "UsedFor", "LocationOf", "MotivationOf", "CapableOf", "CapableOfReceivingAction"];

pub const DEFAULT_KLINES: &[&str] = &["ThematicKLine", "SuperThematicKLine", "ConceptuallyRelatedTo"];

/// Validated set of relation types.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeRegistry {
    types: BTreeMap<String, RelationType>,
    negatives: BTreeMap<String, String>,
}

impl TypeRegistry {
    pub fn register(defs: Vec<RelationType>) -> Result<Self, RegistryError> {
        let mut types = BTreeMap::new();
        for def in defs {
            if types.contains_key(&def.name) {
                return Err(RegistryError::Duplicate(def.name));
            }
            types.insert(def.name.clone(), def);
        }
        let mut negatives = BTreeMap::new();
        for def in types.values().filter(|t| t.is_negative()) {
            let counterpart = def
                .affirmative_counterpart
                .as_ref()
                .ok_or_else(|| RegistryError::MissingCounterpart(def.name.clone()))?;
            match types.get(counterpart) {
                Some(aff) if aff.kline => return Err(RegistryError::NegatedKLine(counterpart.clone())),
                Some(aff) if !aff.is_negative() => {}
                _ => {
                    return Err(RegistryError::UnknownCounterpart {
                        negative: def.name.clone(),
                        counterpart: counterpart.clone(),
                    })
                }
            }
            if def.kline {
                return Err(RegistryError::NegatedKLine(def.name.clone()));
            }
            negatives.insert(counterpart.clone(), def.name.clone());
        }
        Ok(Self { types, negatives })
    }

    /// The types named in the generation pipeline, plus `Not*` forms for the non-k-line ones.
    pub fn with_defaults() -> Self {
        let mut defs = Vec::new();
        for name in DEFAULT_AFFIRMATIVES {
            defs.push(RelationType::affirmative(name));
            defs.push(RelationType::negative(&format!("Not{name}"), name));
        }
        for name in DEFAULT_KLINES {
            defs.push(RelationType::kline(name));
        }
        Self::register(defs).expect("default registry is consistent")
    }

    /// Parses a configuration file. Each non-comment line is
    /// `Name affirmative [kline]` or `Name negative Counterpart`.
    pub fn parse_config(text: &str) -> Result<Self, RegistryError> {
        let mut defs = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let syntax = |reason: &str| RegistryError::Syntax { line: n + 1, reason: reason.to_string() };
            let def = match fields.as_slice() {
                [name, "affirmative"] => RelationType::affirmative(name),
                [name, "affirmative", "kline"] => RelationType::kline(name),
                [name, "negative", counterpart] => RelationType::negative(name, counterpart),
                [name, "negative"] => return Err(RegistryError::MissingCounterpart(name.to_string())),
                [_, "negative", _, "kline"] => return Err(syntax("negative types cannot be k-lines")),
                _ => return Err(syntax("expected `Name affirmative [kline]` or `Name negative Counterpart`")),
            };
            defs.push(def);
        }
        Self::register(defs)
    }

    pub fn get(&self, name: &str) -> Option<&RelationType> {
        self.types.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.types.contains_key(name)
    }

    /// Negative counterpart of an affirmative type, if one is registered.
    pub fn negative_of(&self, affirmative: &str) -> Option<&RelationType> {
        self.negatives.get(affirmative).and_then(|n| self.types.get(n))
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &RelationType> {
        self.types.values()
    }
}

/// Everything needed to validate externally supplied lines.
#[derive(Debug, Clone, Default)]
pub struct Schema {
    pub types: TypeRegistry,
    pub vocab: ProfileVocabulary,
}

impl Schema {
    pub fn new(types: TypeRegistry, vocab: ProfileVocabulary) -> Self {
        Self { types, vocab }
    }

    pub fn with_defaults() -> Self {
        Self::new(TypeRegistry::with_defaults(), ProfileVocabulary::default())
    }
}

/// Identity of a relation once profiles have been dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationKey {
    pub rtype: String,
    pub param1: String,
    pub param2: String,
}

impl fmt::Display for RelationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} \"{}\" \"{}\")", self.rtype, self.param1, self.param2)
    }
}

/// A binary relation with provenance counters.
///
/// `f` counts direct extractions, `i` counts inferred derivations and `ids`
/// lists the statements the relation came from. `profile` is present until
/// the network is filtered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub rtype: String,
    pub param1: String,
    pub param2: String,
    pub f: u32,
    pub i: u32,
    pub ids: Vec<u64>,
    pub profile: Option<ProfileAttrs>,
}

impl Relation {
    pub fn key(&self) -> RelationKey {
        RelationKey { rtype: self.rtype.clone(), param1: self.param1.clone(), param2: self.param2.clone() }
    }

    pub fn weight(&self) -> u32 {
        self.f + self.i
    }

    pub fn other_end(&self, concept: &str) -> Option<&str> {
        if self.param1 == concept {
            Some(&self.param2)
        } else if self.param2 == concept {
            Some(&self.param1)
        } else {
            None
        }
    }

    /// Final form without a profile, intermediate relaxed form with one.
    pub fn to_line(&self) -> String {
        let counters = format!("f={};i={}", self.f, self.i);
        let ids = join_ids(&self.ids);
        match &self.profile {
            None => format!("({} \"{}\" \"{}\" \"{}\" \"{}\")", self.rtype, self.param1, self.param2, counters, ids),
            Some(p) => {
                let [g, a, e, c, s] = p.codes();
                format!(
                    "({} \"{}\" \"{}\" \"{g}\" \"{a}\" \"{e}\" \"{c}\" \"{s}\" \"{ids}\" \"{counters}\")",
                    self.rtype, self.param1, self.param2
                )
            }
        }
    }

    /// Parses a final (4-slot) or relaxed intermediate (9-slot) line.
    pub fn parse(line: &str, schema: &Schema) -> Result<Self, ParseError> {
        let (rtype, slots) = split_line(line)?;
        check_type(rtype, schema)?;
        let (profile, counters, ids) = match slots.as_slice() {
            [_, _, counters, ids] => (None, *counters, *ids),
            [_, _, g, a, e, c, s, ids, counters] => {
                let p = ProfileAttrs::from_codes(g, a, e, c, s, &schema.vocab)?;
                (Some(p), *counters, *ids)
            }
            _ => return Err(ParseError::Malformed(format!("expected 4 or 9 quoted slots, got {}", slots.len()))),
        };
        let (f, i) = parse_counters(counters)?;
        let rel = Relation {
            rtype: rtype.to_string(),
            param1: slots[0].to_string(),
            param2: slots[1].to_string(),
            f,
            i,
            ids: parse_ids(ids)?,
            profile,
        };
        rel.validate()?;
        Ok(rel)
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        check_param(&self.param1)?;
        check_param(&self.param2)?;
        if self.f + self.i == 0 {
            return Err(ParseError::Invalid("f + i must be at least 1".into()));
        }
        if self.ids.is_empty() {
            return Err(ParseError::Invalid("relation has no statement ids".into()));
        }
        let mut seen = HashSet::new();
        if !self.ids.iter().all(|id| seen.insert(*id)) {
            return Err(ParseError::Invalid("duplicate statement id".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// A freshly extracted relation: one statement, profile attached, no counters yet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRelation {
    pub rtype: String,
    pub param1: String,
    pub param2: String,
    pub profile: ProfileAttrs,
    pub id: u64,
}

impl RawRelation {
    pub fn to_line(&self) -> String {
        let [g, a, e, c, s] = self.profile.codes();
        format!(
            "({} \"{}\" \"{}\" \"{g}\" \"{a}\" \"{e}\" \"{c}\" \"{s}\" \"{}\")",
            self.rtype, self.param1, self.param2, self.id
        )
    }

    pub fn parse(line: &str, schema: &Schema) -> Result<Self, ParseError> {
        let (rtype, slots) = split_line(line)?;
        check_type(rtype, schema)?;
        let [p1, p2, g, a, e, c, s, id] = slots.as_slice() else {
            return Err(ParseError::Malformed(format!("expected 8 quoted slots, got {}", slots.len())));
        };
        check_param(p1)?;
        check_param(p2)?;
        Ok(RawRelation {
            rtype: rtype.to_string(),
            param1: p1.to_string(),
            param2: p2.to_string(),
            profile: ProfileAttrs::from_codes(g, a, e, c, s, &schema.vocab)?,
            id: id.parse().map_err(|_| ParseError::BadIds(id.to_string()))?,
        })
    }

    /// Seeds the counters: one direct derivation, nothing inferred.
    pub fn seed(self) -> Relation {
        Relation {
            rtype: self.rtype,
            param1: self.param1,
            param2: self.param2,
            f: 1,
            i: 0,
            ids: vec![self.id],
            profile: Some(self.profile),
        }
    }
}

impl fmt::Display for RawRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

fn check_type(rtype: &str, schema: &Schema) -> Result<(), ParseError> {
    if schema.types.contains(rtype) {
        Ok(())
    } else {
        Err(ParseError::UnknownType(rtype.to_string()))
    }
}

pub(crate) fn check_param(p: &str) -> Result<(), ParseError> {
    if p.is_empty() || p.contains(['"', '\n', '\r']) {
        return Err(ParseError::Invalid(format!("bad concept phrase `{p}`")));
    }
    Ok(())
}

pub fn join_ids(ids: &[u64]) -> String {
    ids.iter().map(u64::to_string).collect::<Vec<_>>().join(";")
}

fn parse_ids(s: &str) -> Result<Vec<u64>, ParseError> {
    s.split(';').map(|t| t.parse::<u64>().map_err(|_| ParseError::BadIds(s.to_string()))).collect()
}

fn parse_counters(s: &str) -> Result<(u32, u32), ParseError> {
    let bad = || ParseError::BadCounters(s.to_string());
    let (f, i) = s.split_once(';').ok_or_else(bad)?;
    let f = f.strip_prefix("f=").ok_or_else(bad)?;
    let i = i.strip_prefix("i=").ok_or_else(bad)?;
    let digits = |v: &str| !v.is_empty() && v.bytes().all(|b| b.is_ascii_digit());
    if !digits(f) || !digits(i) {
        return Err(bad());
    }
    Ok((f.parse().map_err(|_| bad())?, i.parse().map_err(|_| bad())?))
}

/// Splits `(Type "a" "b" ...)` into the type name and the quoted slot contents.
fn split_line(line: &str) -> Result<(&str, Vec<&str>), ParseError> {
    let malformed = |why: &str| ParseError::Malformed(format!("{why}: {line}"));
    let body =
        line.strip_prefix('(').and_then(|l| l.strip_suffix(')')).ok_or_else(|| malformed("missing parentheses"))?;
    let (rtype, mut rest) = body.split_once(' ').ok_or_else(|| malformed("no slots"))?;
    if rtype.is_empty() || !rtype.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(malformed("bad type name"));
    }
    let mut slots = Vec::new();
    loop {
        let open = rest.strip_prefix('"').ok_or_else(|| malformed("expected quote"))?;
        let close = open.find('"').ok_or_else(|| malformed("unterminated quote"))?;
        slots.push(&open[..close]);
        rest = &open[close + 1..];
        if rest.is_empty() {
            break;
        }
        rest = rest.strip_prefix(' ').ok_or_else(|| malformed("expected single space"))?;
    }
    Ok((rtype, slots))
}
