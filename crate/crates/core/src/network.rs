//! Immutable, profile-scoped semantic networks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::ParseError;
use crate::normalization::strip_tags;
use crate::profile::ProfileQuery;
use crate::relation::{Relation, RelationKey, Schema};
use crate::relaxation::{merge_derivation, sorted_ids, Derivation};

/// A set of profile-free relations with a concept index.
///
/// Concepts are stored as they appear in relation parameters (tagged when the
/// pipeline ran normalization). Lookups by concept accept either the stored
/// label or its tag-stripped form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptNet {
    relations: BTreeMap<RelationKey, Relation>,
    index: BTreeMap<String, BTreeSet<RelationKey>>,
    plain: BTreeMap<String, BTreeSet<String>>,
    query: ProfileQuery,
}

impl ConceptNet {
    pub fn new(query: ProfileQuery) -> Self {
        Self { query, ..Self::default() }
    }

    /// Builds a network, merging relations that share a key.
    pub fn from_relations<I: IntoIterator<Item = Relation>>(query: ProfileQuery, relations: I) -> Self {
        let mut net = Self::new(query);
        for r in relations {
            net.insert(r);
        }
        net
    }

    /// Inserts a relation; an equal key sums counters and unions ids.
    pub fn insert(&mut self, mut r: Relation) {
        r.profile = None;
        let key = r.key();
        match self.relations.get_mut(&key) {
            Some(existing) => {
                existing.f += r.f;
                existing.i += r.i;
                let mut ids = existing.ids.clone();
                ids.extend(&r.ids);
                existing.ids = sorted_ids(&ids);
            }
            None => {
                r.ids = sorted_ids(&r.ids);
                self.index_key(&key);
                self.relations.insert(key, r);
            }
        }
    }

    /// Records a derivation event with the relaxation merge rule.
    pub fn derive(&mut self, key: RelationKey, ids: &[u64]) -> Derivation {
        if let Some(existing) = self.relations.get_mut(&key) {
            return merge_derivation(existing, ids);
        }
        self.index_key(&key);
        self.relations.insert(
            key.clone(),
            Relation {
                rtype: key.rtype,
                param1: key.param1,
                param2: key.param2,
                f: 0,
                i: 1,
                ids: sorted_ids(ids),
                profile: None,
            },
        );
        Derivation::Created
    }

    fn index_key(&mut self, key: &RelationKey) {
        for concept in [&key.param1, &key.param2] {
            self.index.entry(concept.clone()).or_default().insert(key.clone());
            self.plain.entry(strip_tags(concept)).or_default().insert(concept.clone());
        }
    }

    pub fn query(&self) -> &ProfileQuery {
        &self.query
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn get(&self, key: &RelationKey) -> Option<&Relation> {
        self.relations.get(key)
    }

    /// Relations in key order.
    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    /// Stored concept labels in sorted order.
    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn node_count(&self) -> usize {
        self.index.len()
    }

    /// Stored labels a query string refers to: the exact label, or every
    /// label whose tag-stripped form equals it.
    pub fn resolve(&self, concept: &str) -> Vec<&str> {
        if let Some((label, _)) = self.index.get_key_value(concept) {
            return vec![label.as_str()];
        }
        self.plain.get(concept).map(|labels| labels.iter().map(String::as_str).collect()).unwrap_or_default()
    }

    /// Relations incident to a concept, each once, in key order.
    pub fn incident(&self, concept: &str) -> Vec<&Relation> {
        let keys: BTreeSet<&RelationKey> =
            self.resolve(concept).into_iter().filter_map(|label| self.index.get(label)).flatten().collect();
        keys.into_iter().map(|k| &self.relations[k]).collect()
    }

    /// Number of incident relations, counting a self-loop once.
    pub fn degree(&self, concept: &str) -> usize {
        self.incident(concept).len()
    }

    pub fn metrics(&self) -> NetworkMetrics {
        compute_density(self)
    }

    /// One final-form relation line per relation, LF-terminated.
    pub fn to_text(&self) -> String {
        self.relations().map(|r| r.to_line() + "\n").collect()
    }

    pub fn parse(text: &str, schema: &Schema, query: ProfileQuery) -> Result<Self, ParseError> {
        let mut net = Self::new(query);
        for line in text.lines().map(str::trim_end).filter(|l| !l.is_empty()) {
            let r = Relation::parse(line, schema)?;
            if r.profile.is_some() {
                return Err(ParseError::Malformed(format!("network line carries a profile: {line}")));
            }
            net.insert(r);
        }
        Ok(net)
    }

    /// Checks that the concept index and the relation set agree.
    pub fn index_is_consistent(&self) -> bool {
        let mut expected: BTreeMap<&str, BTreeSet<&RelationKey>> = BTreeMap::new();
        for key in self.relations.keys() {
            expected.entry(&key.param1).or_default().insert(key);
            expected.entry(&key.param2).or_default().insert(key);
        }
        expected.len() == self.index.len()
            && expected.iter().all(|(c, keys)| self.index.get(*c).is_some_and(|s| s.iter().eq(keys.iter().copied())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkMetrics {
    pub nodes: usize,
    pub relations: usize,
    /// `2 * relations / nodes`, or 0 for an empty network.
    pub density: f64,
}

pub fn compute_density(net: &ConceptNet) -> NetworkMetrics {
    let nodes = net.node_count();
    let relations = net.len();
    let density = if nodes == 0 { 0.0 } else { 2.0 * relations as f64 / nodes as f64 };
    NetworkMetrics { nodes, relations, density }
}
