//! Counter seeding, grouping and heuristic inference over profiled relations.
//!
//! A derivation never touches `f`. When its target key is new the relation is
//! created with `f=0;i=1`; when the key exists, `i` is incremented and the
//! source ids are merged in. A derivation whose ids are all present already is
//! a no-op, which keeps every pass idempotent.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::normalization::{phrase_tags, split_tagged, Tag};
use crate::profile::ProfileAttrs;
use crate::relation::{RawRelation, Relation, Schema};

pub const IS_A: &str = "IsA";
pub const PROPERTY_OF: &str = "PropertyOf";
pub const USED_FOR: &str = "UsedFor";
pub const CAPABLE_OF: &str = "CapableOf";
pub const CAPABLE_OF_RECEIVING_ACTION: &str = "CapableOfReceivingAction";
pub const THEMATIC_KLINE: &str = "ThematicKLine";
pub const SUPER_THEMATIC_KLINE: &str = "SuperThematicKLine";

/// Switches for the inference heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeuristicFlags {
    pub property_of: bool,
    pub capable_of: bool,
    pub capable_of_receiving_action: bool,
    pub thematic_kline: bool,
    pub super_thematic_kline: bool,
    /// IsA ∘ PropertyOf composition applied after filtering.
    pub post_filter_property_of: bool,
}

impl Default for HeuristicFlags {
    fn default() -> Self {
        Self {
            property_of: true,
            capable_of: false,
            capable_of_receiving_action: false,
            thematic_kline: true,
            super_thematic_kline: false,
            post_filter_property_of: true,
        }
    }
}

impl HeuristicFlags {
    pub fn none() -> Self {
        Self {
            property_of: false,
            capable_of: false,
            capable_of_receiving_action: false,
            thematic_kline: false,
            super_thematic_kline: false,
            post_filter_property_of: false,
        }
    }

    /// Every relaxation heuristic on.
    pub fn all() -> Self {
        Self {
            property_of: true,
            capable_of: true,
            capable_of_receiving_action: true,
            thematic_kline: true,
            super_thematic_kline: true,
            post_filter_property_of: true,
        }
    }
}

/// Intermediate grouping key: type, parameters and the full profile.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupKey {
    pub rtype: String,
    pub param1: String,
    pub param2: String,
    pub profile: ProfileAttrs,
}

impl GroupKey {
    fn of(r: &Relation) -> Self {
        Self {
            rtype: r.rtype.clone(),
            param1: r.param1.clone(),
            param2: r.param2.clone(),
            profile: r.profile.clone().expect("intermediate relations carry a profile"),
        }
    }
}

/// What a single derivation did to its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivation {
    Created,
    Merged,
    Suppressed,
}

/// Applies one derivation event carrying `ids` to an existing relation.
pub(crate) fn merge_derivation(existing: &mut Relation, ids: &[u64]) -> Derivation {
    let mut added = false;
    for id in ids {
        if let Err(at) = existing.ids.binary_search(id) {
            existing.ids.insert(at, *id);
            added = true;
        }
    }
    if added {
        existing.i += 1;
        Derivation::Merged
    } else {
        Derivation::Suppressed
    }
}

pub(crate) fn sorted_ids(ids: &[u64]) -> Vec<u64> {
    ids.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Profiled relations keyed by [`GroupKey`], iterated in key order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationSet {
    map: BTreeMap<GroupKey, Relation>,
}

impl RelationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts, merging counters and ids into an equal-key entry.
    pub fn insert(&mut self, r: Relation) {
        let key = GroupKey::of(&r);
        match self.map.get_mut(&key) {
            Some(existing) => {
                existing.f += r.f;
                existing.i += r.i;
                let mut ids = existing.ids.clone();
                ids.extend(&r.ids);
                existing.ids = sorted_ids(&ids);
            }
            None => {
                let mut r = r;
                r.ids = sorted_ids(&r.ids);
                self.map.insert(key, r);
            }
        }
    }

    pub fn get(&self, key: &GroupKey) -> Option<&Relation> {
        self.map.get(key)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Relation> {
        self.map.values()
    }

    pub fn into_vec(self) -> Vec<Relation> {
        self.map.into_values().collect()
    }

    pub fn total_f(&self) -> u64 {
        self.iter().map(|r| u64::from(r.f)).sum()
    }

    /// Records a derivation event for `key`.
    pub fn derive(&mut self, key: GroupKey, ids: &[u64]) -> Derivation {
        if let Some(existing) = self.map.get_mut(&key) {
            return merge_derivation(existing, ids);
        }
        let rel = Relation {
            rtype: key.rtype.clone(),
            param1: key.param1.clone(),
            param2: key.param2.clone(),
            f: 0,
            i: 1,
            ids: sorted_ids(ids),
            profile: Some(key.profile.clone()),
        };
        self.map.insert(key, rel);
        Derivation::Created
    }

    pub fn to_lines(&self) -> String {
        self.iter().map(|r| r.to_line() + "\n").collect()
    }

    /// Reads relaxed intermediate lines; each must carry a profile.
    pub fn parse_lines(text: &str, schema: &Schema) -> Result<Self, ParseError> {
        let mut set = Self::new();
        for line in text.lines().map(str::trim_end).filter(|l| !l.is_empty()) {
            let r = Relation::parse(line, schema)?;
            if r.profile.is_none() {
                return Err(ParseError::Malformed(format!("relaxed line has no profile: {line}")));
            }
            set.insert(r);
        }
        Ok(set)
    }
}

impl FromIterator<Relation> for RelationSet {
    fn from_iter<T: IntoIterator<Item = Relation>>(iter: T) -> Self {
        let mut set = Self::new();
        for r in iter {
            set.insert(r);
        }
        set
    }
}

/// Seeds every relation with `f=1;i=0` and groups equal keys.
pub fn seed_and_group(raw: Vec<RawRelation>) -> RelationSet {
    raw.into_iter().map(RawRelation::seed).collect()
}

/// Counts for one heuristic pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassStats {
    pub heuristic: String,
    pub derived: usize,
    pub merged: usize,
    pub suppressed: usize,
}

impl PassStats {
    fn named(name: &str) -> Self {
        Self { heuristic: name.to_string(), ..Self::default() }
    }

    fn record(&mut self, d: Derivation) {
        match d {
            Derivation::Created => self.derived += 1,
            Derivation::Merged => self.merged += 1,
            Derivation::Suppressed => self.suppressed += 1,
        }
    }
}

/// Report for a full relaxation run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxReport {
    pub input_relations: usize,
    pub grouped_relations: usize,
    pub output_relations: usize,
    pub passes: Vec<PassStats>,
}

/// Runs grouping and then every enabled heuristic in a fixed order, each pass
/// reading the previous pass's output.
pub fn relax(raw: Vec<RawRelation>, flags: &HeuristicFlags) -> (RelationSet, RelaxReport) {
    let input_relations = raw.len();
    let grouped = seed_and_group(raw);
    let grouped_relations = grouped.len();
    let (out, passes) = run_passes(grouped, flags);
    let report = RelaxReport { input_relations, grouped_relations, output_relations: out.len(), passes };
    (out, report)
}

/// The inference passes alone, over an already grouped set.
pub fn run_passes(mut set: RelationSet, flags: &HeuristicFlags) -> (RelationSet, Vec<PassStats>) {
    let mut passes = Vec::new();
    if flags.property_of {
        let (next, stats) = infer_property_of(&set);
        set = next;
        passes.push(stats);
    }
    let (next, family) = apply_family_heuristics(&set, flags);
    passes.extend(family);
    (next, passes)
}

/// An IsA whose first parameter is a noun phrase and whose second is an
/// adjective also yields a PropertyOf over the same parameters and profile.
pub fn infer_property_of(snapshot: &RelationSet) -> (RelationSet, PassStats) {
    let mut out = snapshot.clone();
    let mut stats = PassStats::named(PROPERTY_OF);
    for r in snapshot.iter().filter(|r| r.rtype == IS_A) {
        if !(is_noun_phrase(&r.param1) && is_adjective(&r.param2)) {
            continue;
        }
        let key = GroupKey { rtype: PROPERTY_OF.to_string(), ..GroupKey::of(r) };
        for id in &r.ids {
            stats.record(out.derive(key.clone(), &[*id]));
        }
    }
    (out, stats)
}

/// CapableOf, CapableOfReceivingAction, ThematicKLine and SuperThematicKLine,
/// each behind its own flag and each reading a frozen snapshot.
pub fn apply_family_heuristics(set: &RelationSet, flags: &HeuristicFlags) -> (RelationSet, Vec<PassStats>) {
    type Pass = fn(&RelationSet) -> (RelationSet, PassStats);
    let passes: [(bool, Pass); 4] = [
        (flags.capable_of, infer_capable_of),
        (flags.capable_of_receiving_action, infer_capable_of_receiving_action),
        (flags.thematic_kline, infer_thematic_kline),
        (flags.super_thematic_kline, infer_super_thematic_kline),
    ];
    let mut current = set.clone();
    let mut stats = Vec::new();
    for (enabled, pass) in passes {
        if enabled {
            let (next, s) = pass(&current);
            current = next;
            stats.push(s);
        }
    }
    (current, stats)
}

/// UsedFor(NP, VERB ...) gives CapableOf(NP, VERB ...).
pub fn infer_capable_of(snapshot: &RelationSet) -> (RelationSet, PassStats) {
    let mut out = snapshot.clone();
    let mut stats = PassStats::named(CAPABLE_OF);
    for r in snapshot.iter().filter(|r| r.rtype == USED_FOR) {
        if is_noun_phrase(&r.param1) && starts_with_verb(&r.param2) {
            let key = GroupKey { rtype: CAPABLE_OF.to_string(), ..GroupKey::of(r) };
            for id in &r.ids {
                stats.record(out.derive(key.clone(), &[*id]));
            }
        }
    }
    (out, stats)
}

/// UsedFor(x, VERB NP) gives CapableOfReceivingAction(NP, VERB): the object
/// of the use can undergo the action.
pub fn infer_capable_of_receiving_action(snapshot: &RelationSet) -> (RelationSet, PassStats) {
    let mut out = snapshot.clone();
    let mut stats = PassStats::named(CAPABLE_OF_RECEIVING_ACTION);
    for r in snapshot.iter().filter(|r| r.rtype == USED_FOR) {
        let Some((verb, object)) = r.param2.split_once(' ') else {
            continue;
        };
        if split_tagged(verb).map(|(_, t)| t) != Some(Tag::Verb) || !is_noun_phrase(object) {
            continue;
        }
        let key = GroupKey {
            rtype: CAPABLE_OF_RECEIVING_ACTION.to_string(),
            param1: object.to_string(),
            param2: verb.to_string(),
            profile: GroupKey::of(r).profile,
        };
        for id in &r.ids {
            stats.record(out.derive(key.clone(), &[*id]));
        }
    }
    (out, stats)
}

/// Two affirmative non-k-line relations of one type and profile that share
/// their second parameter link their first parameters with a ThematicKLine.
///
/// The pair's first parameter comes from the relation with the smaller
/// leading id; an existing reversed link absorbs the derivation.
pub fn infer_thematic_kline(snapshot: &RelationSet) -> (RelationSet, PassStats) {
    let mut out = snapshot.clone();
    let mut stats = PassStats::named(THEMATIC_KLINE);
    let mut groups: BTreeMap<(&str, &str, &ProfileAttrs), Vec<&Relation>> = BTreeMap::new();
    for r in snapshot.iter().filter(|r| is_plain_affirmative(&r.rtype)) {
        let profile = r.profile.as_ref().expect("profiled");
        groups.entry((&r.rtype, &r.param2, profile)).or_default().push(r);
    }
    for ((_, _, profile), mut members) in groups {
        members.sort_by(|a, b| a.ids[0].cmp(&b.ids[0]).then_with(|| a.param1.cmp(&b.param1)));
        for (n, a) in members.iter().enumerate() {
            for b in &members[n + 1..] {
                if a.param1 == b.param1 {
                    continue;
                }
                let forward = GroupKey {
                    rtype: THEMATIC_KLINE.to_string(),
                    param1: a.param1.clone(),
                    param2: b.param1.clone(),
                    profile: profile.clone(),
                };
                let reversed = GroupKey { param1: b.param1.clone(), param2: a.param1.clone(), ..forward.clone() };
                let key = if out.get(&reversed).is_some() { reversed } else { forward };
                let mut ids = a.ids.clone();
                ids.extend(&b.ids);
                stats.record(out.derive(key, &sorted_ids(&ids)));
            }
        }
    }
    (out, stats)
}

/// A multiword parameter headed by a verb is linked to that verb.
pub fn infer_super_thematic_kline(snapshot: &RelationSet) -> (RelationSet, PassStats) {
    let mut out = snapshot.clone();
    let mut stats = PassStats::named(SUPER_THEMATIC_KLINE);
    for r in snapshot.iter().filter(|r| is_plain_affirmative(&r.rtype)) {
        for param in [&r.param1, &r.param2] {
            let Some((head, _)) = param.split_once(' ') else {
                continue;
            };
            if split_tagged(head).map(|(_, t)| t) != Some(Tag::Verb) {
                continue;
            }
            let key = GroupKey {
                rtype: SUPER_THEMATIC_KLINE.to_string(),
                param1: param.clone(),
                param2: head.to_string(),
                profile: GroupKey::of(r).profile,
            };
            for id in &r.ids {
                stats.record(out.derive(key.clone(), &[*id]));
            }
        }
    }
    (out, stats)
}

/// Types produced by the heuristics are excluded so no pass feeds on itself.
fn is_plain_affirmative(rtype: &str) -> bool {
    !rtype.starts_with("Not") && ![THEMATIC_KLINE, SUPER_THEMATIC_KLINE, "ConceptuallyRelatedTo"].contains(&rtype)
}

/// Nouns, proper names, adjectives and inner prepositions, with at least one noun.
pub fn is_noun_phrase(param: &str) -> bool {
    let Some(tags) = phrase_tags(param).into_iter().collect::<Option<Vec<Tag>>>() else {
        return false;
    };
    let allowed = |t: &Tag| matches!(t, Tag::Subst | Tag::Propn | Tag::Adj | Tag::Prep);
    !tags.is_empty()
        && tags.iter().all(allowed)
        && tags.iter().any(|t| matches!(t, Tag::Subst | Tag::Propn))
        && tags.first() != Some(&Tag::Prep)
        && tags.last() != Some(&Tag::Prep)
}

/// Adverbs followed by a single adjective: `caro/ADJ`, `muito/ADV caro/ADJ`.
pub fn is_adjective(param: &str) -> bool {
    let Some(tags) = phrase_tags(param).into_iter().collect::<Option<Vec<Tag>>>() else {
        return false;
    };
    match tags.split_last() {
        Some((Tag::Adj, rest)) => rest.iter().all(|t| *t == Tag::Adv),
        _ => false,
    }
}

fn starts_with_verb(param: &str) -> bool {
    phrase_tags(param).first().copied().flatten() == Some(Tag::Verb)
}
