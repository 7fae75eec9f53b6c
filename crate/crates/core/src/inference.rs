//! Read-only operations over a network: context retrieval by spreading
//! activation, node display, structure-mapping analogy, and the query
//! expansion helpers.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::InferenceError;
use crate::network::ConceptNet;
use crate::normalization::{lemma_phrase, normalize_phrase, strip_tags, MorphologyProvider, Tag};
use crate::relation::{Relation, RelationKey, TypeRegistry};
use crate::resources::{data_lines, Lang};

pub const DEFAULT_DEPTH: usize = 2;
pub const DEFAULT_DECAY: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredConcept {
    pub concept: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextParams {
    pub depth: usize,
    pub decay: f64,
}

impl Default for ContextParams {
    fn default() -> Self {
        Self { depth: DEFAULT_DEPTH, decay: DEFAULT_DECAY }
    }
}

/// Strength of one relation as an activation edge.
pub fn edge_strength(r: &Relation) -> f64 {
    (1.0 + f64::from(r.f) + f64::from(r.i)).ln()
}

/// Spreads activation from the seeds along relations in both directions.
///
/// A concept's score sums, over every simple path of at most `depth` edges
/// from a seed, the product of the edge strengths times
/// `decay^(length - 1)`. With several seeds the per-seed activations are
/// added, and a concept reached from every seed present in the network has
/// its sum multiplied by the number of such seeds. Self-loops carry no
/// activation. Seeds are left out of the result, which is sorted by score
/// and then by concept.
pub fn get_context(
    net: &ConceptNet,
    seeds: &[&str],
    params: ContextParams,
) -> Result<Vec<ScoredConcept>, InferenceError> {
    if params.depth < 1 {
        return Err(InferenceError::BadDepth);
    }
    if !params.decay.is_finite() || params.decay < 0.0 {
        return Err(InferenceError::BadDecay(params.decay));
    }
    let mut adjacency: HashMap<&str, Vec<(&str, f64)>> = HashMap::new();
    for r in net.relations().filter(|r| r.param1 != r.param2) {
        let w = edge_strength(r);
        adjacency.entry(&r.param1).or_default().push((&r.param2, w));
        adjacency.entry(&r.param2).or_default().push((&r.param1, w));
    }

    let mut seed_labels: HashSet<&str> = HashSet::new();
    let mut per_seed: Vec<HashMap<&str, f64>> = Vec::new();
    for seed in seeds {
        let labels = net.resolve(seed);
        if labels.is_empty() {
            continue;
        }
        let mut act = HashMap::new();
        for start in labels {
            seed_labels.insert(start);
            let mut visited = vec![start];
            spread(&adjacency, start, 1.0, 0, params, &mut visited, &mut act);
        }
        per_seed.push(act);
    }

    let mut total: HashMap<&str, f64> = HashMap::new();
    for act in &per_seed {
        for (c, s) in act {
            *total.entry(c).or_default() += s;
        }
    }
    if per_seed.len() > 1 {
        let boost = per_seed.len() as f64;
        for (c, s) in total.iter_mut() {
            if per_seed.iter().all(|a| a.contains_key(c)) {
                *s *= boost;
            }
        }
    }
    let mut out: Vec<ScoredConcept> = total
        .into_iter()
        .filter(|(c, _)| !seed_labels.contains(c))
        .map(|(c, score)| ScoredConcept { concept: c.to_string(), score })
        .collect();
    out.sort_by(|a, b| {
        b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal).then_with(|| a.concept.cmp(&b.concept))
    });
    Ok(out)
}

fn spread<'a>(
    adjacency: &HashMap<&'a str, Vec<(&'a str, f64)>>,
    node: &'a str,
    product: f64,
    length: usize,
    params: ContextParams,
    visited: &mut Vec<&'a str>,
    act: &mut HashMap<&'a str, f64>,
) {
    let Some(edges) = adjacency.get(node) else {
        return;
    };
    for &(next, w) in edges {
        if visited.contains(&next) {
            continue;
        }
        let p = product * w;
        *act.entry(next).or_default() += p * params.decay.powi(length as i32);
        if length + 1 < params.depth {
            visited.push(next);
            spread(adjacency, next, p, length + 1, params, visited, act);
            visited.pop();
        }
    }
}

/// Sentence patterns per relation type, with `{1}` and `{2}` slots.
#[derive(Debug, Clone)]
pub struct Renderer {
    patterns: BTreeMap<String, (String, Option<String>)>,
    types: TypeRegistry,
}

impl Renderer {
    /// Reads `type<TAB>pattern[<TAB>negative pattern]` records.
    pub fn parse(text: &str, types: TypeRegistry) -> Result<Self, InferenceError> {
        let mut patterns = BTreeMap::new();
        for (line, record) in data_lines(text) {
            let bad = |reason: &str| InferenceError::RenderTemplate { line, reason: reason.to_string() };
            let fields: Vec<&str> = record.split('\t').collect();
            let (name, affirmative, negative) = match fields.as_slice() {
                [n, a] => (*n, *a, None),
                [n, a, neg] => (*n, *a, Some(neg.to_string())),
                _ => return Err(bad("expected `type<TAB>pattern[<TAB>negative]`")),
            };
            for p in std::iter::once(affirmative).chain(negative.as_deref()) {
                if !(p.contains("{1}") && p.contains("{2}")) {
                    return Err(bad("pattern needs both {1} and {2}"));
                }
            }
            patterns.insert(name.to_string(), (affirmative.to_string(), negative));
        }
        Ok(Self { patterns, types })
    }

    pub fn bundled(lang: Lang, types: TypeRegistry) -> Self {
        Self::parse(lang.render(), types).expect("bundled rendering templates parse")
    }

    /// Types with an affirmative pattern.
    pub fn templated_types(&self) -> impl Iterator<Item = &str> {
        self.patterns.keys().map(String::as_str)
    }

    pub fn render(&self, r: &Relation) -> String {
        self.render_parts(&r.rtype, &r.param1, &r.param2)
    }

    /// Negative types borrow their counterpart's negative pattern; anything
    /// without a pattern falls back to `param1 — TYPE — param2`.
    pub fn render_parts(&self, rtype: &str, param1: &str, param2: &str) -> String {
        let (p1, p2) = (strip_tags(param1), strip_tags(param2));
        let pattern = self.patterns.get(rtype).map(|(a, _)| a.as_str()).or_else(|| {
            let counterpart = self.types.get(rtype)?.affirmative_counterpart.as_ref()?;
            self.patterns.get(counterpart)?.1.as_deref()
        });
        match pattern {
            Some(p) => capitalize(&p.replace("{1}", &p1).replace("{2}", &p2)),
            None => format!("{p1} — {rtype} — {p2}"),
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub relation: Relation,
    pub sentence: String,
    pub ids: Vec<u64>,
}

/// Every relation incident to `concept`, rendered, with its statement ids.
pub fn display_node(net: &ConceptNet, concept: &str, renderer: &Renderer) -> Vec<NodeEntry> {
    net.incident(concept)
        .into_iter()
        .map(|r| NodeEntry { relation: r.clone(), sentence: renderer.render(r), ids: r.ids.clone() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correspondence {
    pub base: String,
    pub target: String,
    /// Relation pairs aligned when the pairing was accepted.
    pub supporting: Vec<(RelationKey, RelationKey)>,
    pub systematicity: usize,
    /// Both sides carry the same label.
    pub literal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analogy {
    /// Literal correspondences first, then the rest, each in acceptance order.
    pub correspondences: Vec<Correspondence>,
    /// Relation pairs aligned by the final mapping.
    pub total_systematicity: usize,
}

impl Analogy {
    pub fn mapping(&self) -> BTreeMap<String, String> {
        self.correspondences.iter().map(|c| (c.base.clone(), c.target.clone())).collect()
    }
}

/// One concept mapping under construction.
#[derive(Debug, Clone, Default)]
struct Mapping<'a> {
    forward: HashMap<&'a str, &'a str>,
    backward: HashMap<&'a str, &'a str>,
}

impl<'a> Mapping<'a> {
    /// Two endpoints align when they are paired, or when neither is paired and
    /// the labels are identical.
    fn compatible(&self, u: &str, v: &str) -> bool {
        match self.forward.get(u) {
            Some(m) => *m == v,
            None => !self.backward.contains_key(v) && u == v,
        }
    }

    fn is_used(&self, y: &str) -> bool {
        self.backward.contains_key(y)
    }

    fn insert(&mut self, x: &'a str, y: &'a str) {
        self.forward.insert(x, y);
        self.backward.insert(y, x);
    }

    fn remove(&mut self, x: &str) -> Option<&'a str> {
        let y = self.forward.remove(x)?;
        self.backward.remove(y);
        Some(y)
    }
}

/// Number of same-type relation pairs whose endpoints both align under `mapping`.
pub fn systematicity(base: &ConceptNet, target: &ConceptNet, mapping: &BTreeMap<String, String>) -> usize {
    let mut m = Mapping::default();
    for (x, y) in mapping {
        m.insert(x, y);
    }
    aligned_pairs(base, target)
        .filter(|(b, t)| m.compatible(&b.param1, &t.param1) && m.compatible(&b.param2, &t.param2))
        .count()
}

fn aligned_pairs<'a>(
    base: &'a ConceptNet,
    target: &'a ConceptNet,
) -> impl Iterator<Item = (&'a Relation, &'a Relation)> {
    base.relations().flat_map(move |b| target.relations().filter(move |t| t.rtype == b.rtype).map(move |t| (b, t)))
}

/// Greedy structure mapping from `base` onto `target`.
///
/// A candidate pairing (x, y) is supported by each same-type relation pair
/// holding x and y in the same slot whose other endpoints align once x maps
/// to y. Pairs whose other endpoints are both still free count as open
/// support. Candidates are ranked by support, then open support, then
/// identical labels, then the lexicographically smallest pair, and the best
/// is accepted until no candidate has support of either kind left.
/// Pairings that align nothing under the final mapping are dropped.
pub fn get_analogy(base: &ConceptNet, target: &ConceptNet) -> Result<Analogy, InferenceError> {
    if base.is_empty() || target.is_empty() {
        return Err(InferenceError::EmptyNetwork);
    }
    // candidate -> (relation pair, slot of x) it may be supported by
    let mut candidates: Candidates = BTreeMap::new();
    for (b, t) in aligned_pairs(base, target) {
        candidates.entry((&b.param1, &t.param1)).or_default().push((b, t, 0));
        candidates.entry((&b.param2, &t.param2)).or_default().push((b, t, 1));
    }

    let mut starts = vec![Mapping::default()];
    for (b, t) in
        aligned_pairs(base, target).filter(|(b, t)| b.param1 != b.param2 && t.param1 != t.param2).take(MAX_STARTS)
    {
        let mut m = Mapping::default();
        m.insert(&b.param1, &t.param1);
        m.insert(&b.param2, &t.param2);
        starts.push(m);
    }
    let mut best: Option<(usize, Mapping, Vec<Correspondence>)> = None;
    for mut mapping in starts {
        let mut seeded: Vec<(&str, &str)> = mapping.forward.iter().map(|(&x, &y)| (x, y)).collect();
        seeded.sort_unstable();
        let mut accepted: Vec<Correspondence> = seeded
            .into_iter()
            .map(|(x, y)| Correspondence {
                base: x.to_string(),
                target: y.to_string(),
                supporting: Vec::new(),
                systematicity: 0,
                literal: x == y,
            })
            .collect();
        accepted.extend(extend_greedily(&candidates, &mut mapping));
        improve(base, target, &mut mapping);
        let score = aligned_count(base, target, &mapping);
        if best.as_ref().is_none_or(|(s, _, _)| score > *s) {
            best = Some((score, mapping, accepted));
        }
    }
    let (_, mapping, mut accepted) = best.expect("at least one start");
    let finals = final_support(base, target, &mapping);
    accepted.retain(|c| mapping.forward.get(c.base.as_str()) == Some(&c.target.as_str()));
    let mut extra: Vec<(&str, &str)> = mapping
        .forward
        .iter()
        .map(|(&x, &y)| (x, y))
        .filter(|&(x, y)| !accepted.iter().any(|c| c.base == x && c.target == y))
        .collect();
    extra.sort_unstable();
    accepted.extend(extra.into_iter().map(|(x, y)| Correspondence {
        base: x.to_string(),
        target: y.to_string(),
        supporting: Vec::new(),
        systematicity: 0,
        literal: x == y,
    }));
    accepted.retain(|c| finals.get(&(c.base.as_str(), c.target.as_str())).is_some_and(|s| !s.is_empty()));
    for c in accepted.iter_mut().filter(|c| c.supporting.is_empty()) {
        c.supporting = finals[&(c.base.as_str(), c.target.as_str())].clone();
        c.systematicity = c.supporting.len();
    }
    let (mut correspondences, rest): (Vec<_>, Vec<_>) = accepted.into_iter().partition(|c| c.literal);
    correspondences.extend(rest);
    let analogy = Analogy { total_systematicity: 0, correspondences };
    let total_systematicity = systematicity(base, target, &analogy.mapping());
    Ok(Analogy { total_systematicity, ..analogy })
}

/// Relation-pair seeds tried besides the plain greedy run.
const MAX_STARTS: usize = 32;

type Candidates<'a> = BTreeMap<(&'a str, &'a str), Vec<(&'a Relation, &'a Relation, usize)>>;

fn aligned_count(base: &ConceptNet, target: &ConceptNet, mapping: &Mapping<'_>) -> usize {
    aligned_pairs(base, target)
        .filter(|(b, t)| mapping.compatible(&b.param1, &t.param1) && mapping.compatible(&b.param2, &t.param2))
        .count()
}

/// Accepts the best supported pairing until none is left.
fn extend_greedily<'a>(candidates: &Candidates<'a>, mapping: &mut Mapping<'a>) -> Vec<Correspondence> {
    let mut accepted = Vec::new();
    loop {
        let mut best: Option<((&str, &str), Vec<(RelationKey, RelationKey)>, usize)> = None;
        for (&(x, y), support) in candidates {
            if mapping.forward.contains_key(x) || mapping.is_used(y) {
                continue;
            }
            let mut trial = mapping.clone();
            trial.insert(x, y);
            let mut pairs: BTreeSet<(RelationKey, RelationKey)> = BTreeSet::new();
            let mut open = 0;
            for (b, t, slot) in support {
                let (ob, ot) = if *slot == 0 { (&b.param2, &t.param2) } else { (&b.param1, &t.param1) };
                if trial.compatible(ob, ot) {
                    pairs.insert((b.key(), t.key()));
                } else if !trial.forward.contains_key(ob.as_ref() as &str) && !trial.is_used(ot) {
                    open += 1;
                }
            }
            if pairs.is_empty() && open == 0 {
                continue;
            }
            let better = match &best {
                None => true,
                Some(((bx, by), bp, bo)) => (pairs.len(), open, x == y) > (bp.len(), *bo, bx == by),
            };
            if better {
                best = Some(((x, y), pairs.into_iter().collect(), open));
            }
        }
        let Some(((x, y), supporting, _)) = best else {
            break;
        };
        mapping.insert(x, y);
        accepted.push(Correspondence {
            base: x.to_string(),
            target: y.to_string(),
            systematicity: supporting.len(),
            supporting,
            literal: x == y,
        });
    }

    accepted
}

/// Hill climbing on the total score. Moves remap one concept along a
/// candidate pairing, unmap one concept, or map both endpoints of a relation
/// pair at once; a move is kept only when it strictly raises the score.
fn improve<'a>(base: &'a ConceptNet, target: &'a ConceptNet, mapping: &mut Mapping<'a>) {
    let pairs: Vec<(&'a Relation, &'a Relation)> = aligned_pairs(base, target).collect();
    let mut by_base: HashMap<&str, Vec<usize>> = HashMap::new();
    let mut by_target: HashMap<&str, Vec<usize>> = HashMap::new();
    for (k, (b, t)) in pairs.iter().enumerate() {
        for x in [b.param1.as_str(), b.param2.as_str()] {
            by_base.entry(x).or_default().push(k);
        }
        for y in [t.param1.as_str(), t.param2.as_str()] {
            by_target.entry(y).or_default().push(k);
        }
    }
    let score = |m: &Mapping<'a>, touched: &BTreeSet<usize>| -> usize {
        touched
            .iter()
            .filter(|&&k| {
                let (b, t) = pairs[k];
                m.compatible(&b.param1, &t.param1) && m.compatible(&b.param2, &t.param2)
            })
            .count()
    };

    let mut moves: Vec<Vec<(&'a str, Option<&'a str>)>> = Vec::new();
    for (b, t) in &pairs {
        moves.push(vec![(b.param1.as_str(), Some(t.param1.as_str()))]);
        moves.push(vec![(b.param2.as_str(), Some(t.param2.as_str()))]);
        if b.param1 != b.param2 && t.param1 != t.param2 {
            moves
                .push(vec![(b.param1.as_str(), Some(t.param1.as_str())), (b.param2.as_str(), Some(t.param2.as_str()))]);
        }
    }
    moves.sort_unstable();
    moves.dedup();

    for _round in 0..50 {
        let mut changed = false;
        let mut unmaps: Vec<&'a str> = mapping.forward.keys().copied().collect();
        unmaps.sort_unstable();
        let all = moves.iter().cloned().chain(unmaps.into_iter().map(|x| vec![(x, None)]));
        for mv in all {
            if mv.iter().all(|&(x, y)| mapping.forward.get(x).copied() == y) {
                continue;
            }
            // concepts whose status may change, old holders included
            let mut xs: Vec<&'a str> = Vec::new();
            let mut ys: Vec<&'a str> = Vec::new();
            for &(x, y) in &mv {
                xs.push(x);
                ys.extend(mapping.forward.get(x));
                if let Some(y) = y {
                    ys.push(y);
                    xs.extend(mapping.backward.get(y));
                }
            }
            let touched: BTreeSet<usize> = xs
                .iter()
                .filter_map(|x| by_base.get(x))
                .chain(ys.iter().filter_map(|y| by_target.get(y)))
                .flatten()
                .copied()
                .collect();
            let before = score(mapping, &touched);
            let saved: Vec<(&'a str, Option<&'a str>)> =
                xs.iter().map(|&x| (x, mapping.forward.get(x).copied())).collect();
            for &(x, y) in &mv {
                mapping.remove(x);
                if let Some(y) = y {
                    if let Some(holder) = mapping.backward.get(y).copied() {
                        mapping.remove(holder);
                    }
                    mapping.insert(x, y);
                }
            }
            if score(mapping, &touched) <= before {
                for &(x, _) in &saved {
                    mapping.remove(x);
                }
                for &(x, y) in &saved {
                    if let Some(y) = y {
                        mapping.insert(x, y);
                    }
                }
            } else {
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Relation pairs aligned under `mapping`, grouped by the explicit pairings
/// they involve.
fn final_support<'a>(
    base: &ConceptNet,
    target: &ConceptNet,
    mapping: &Mapping<'a>,
) -> HashMap<(&'a str, &'a str), Vec<(RelationKey, RelationKey)>> {
    let mut out: HashMap<(&str, &str), Vec<(RelationKey, RelationKey)>> = HashMap::new();
    for (b, t) in aligned_pairs(base, target) {
        if !(mapping.compatible(&b.param1, &t.param1) && mapping.compatible(&b.param2, &t.param2)) {
            continue;
        }
        for x in [b.param1.as_str(), b.param2.as_str()] {
            if let Some((&k, &v)) = mapping.forward.get_key_value(x) {
                let entry = out.entry((k, v)).or_default();
                if entry.last() != Some(&(b.key(), t.key())) {
                    entry.push((b.key(), t.key()));
                }
            }
        }
    }
    out
}

/// Query expansion result: the lemmatized expression, the network concepts
/// containing it, and the context of the concepts equal to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryExpansion {
    pub lemma: String,
    pub substring_hits: Vec<String>,
    pub context: Vec<ScoredConcept>,
}

impl QueryExpansion {
    /// Substring hits, then context concepts, without repeats.
    pub fn concepts(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.substring_hits
            .iter()
            .cloned()
            .chain(self.context.iter().map(|c| strip_tags(&c.concept)))
            .filter(|c| seen.insert(c.clone()))
            .collect()
    }
}

pub fn expand_query(expression: &str, net: &ConceptNet, morphology: &dyn MorphologyProvider) -> QueryExpansion {
    let lemma = lemma_phrase(&normalize_phrase(expression, morphology)).to_lowercase();
    if lemma.is_empty() {
        return QueryExpansion { lemma, substring_hits: Vec::new(), context: Vec::new() };
    }
    let substring_hits: Vec<String> = net
        .concepts()
        .map(strip_tags)
        .filter(|plain| plain.to_lowercase().contains(&lemma))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let context = get_context(net, &[&lemma], ContextParams::default()).unwrap_or_default();
    QueryExpansion { lemma, substring_hits, context }
}

/// Splits an expression into noun, verb and adjective phrases.
///
/// Noun phrases are chains of `ADJ* SUBST+ ADJ*` units joined by a
/// preposition; every contiguous sub-chain is emitted, and so is the bare
/// noun core of a unit that carries adjectives. A verb directly
/// followed by a chain yields the verb plus each chain prefix. The full
/// expression comes first among equals; results run longest first.
pub fn decompose_phrases(expression: &str, morphology: &dyn MorphologyProvider) -> Vec<String> {
    let tagged = morphology.tag(expression);
    let words: Vec<&str> = tagged.iter().map(|t| t.surface.as_str()).collect();
    let tags: Vec<Tag> = tagged.iter().map(|t| t.tag).collect();
    if words.is_empty() {
        return Vec::new();
    }
    let is_noun = |t: Tag| matches!(t, Tag::Subst | Tag::Propn);

    // noun units: ADJ* SUBST+ ADJ*
    let mut units: Vec<(usize, usize)> = Vec::new();
    let mut cores: Vec<(usize, usize)> = Vec::new();
    let mut k = 0;
    while k < tags.len() {
        let start = k;
        let mut j = k;
        while j < tags.len() && tags[j] == Tag::Adj {
            j += 1;
        }
        let noun_start = j;
        while j < tags.len() && is_noun(tags[j]) {
            j += 1;
        }
        if j == noun_start {
            k = start + 1;
            continue;
        }
        cores.push((noun_start, j));
        while j < tags.len() && tags[j] == Tag::Adj {
            j += 1;
        }
        units.push((start, j));
        k = j;
    }

    // chains of units linked by PREP (ART)?
    let mut chains: Vec<Vec<(usize, usize)>> = Vec::new();
    for unit in units {
        if let Some(chain) = chains.last_mut() {
            let prev_end = chain.last().expect("non-empty chain").1;
            let gap = &tags[prev_end..unit.0];
            let linked = matches!(gap, [Tag::Prep] | [Tag::Prep, Tag::Art]);
            if linked {
                chain.push(unit);
                continue;
            }
        }
        chains.push(vec![unit]);
    }

    let span = |a: usize, b: usize| words[a..b].join(" ");
    let mut spans: Vec<(usize, usize)> = vec![(0, words.len())];
    spans.extend(&cores);
    for chain in &chains {
        for i in 0..chain.len() {
            for j in i..chain.len() {
                spans.push((chain[i].0, chain[j].1));
            }
        }
        let first = chain[0].0;
        if first > 0 && tags[first - 1] == Tag::Verb {
            for unit in chain {
                spans.push((first - 1, unit.1));
            }
        }
    }
    // adjective phrases: ADV* ADJ+
    let mut k = 0;
    while k < tags.len() {
        let start = k;
        while k < tags.len() && tags[k] == Tag::Adv {
            k += 1;
        }
        let adj_start = k;
        while k < tags.len() && tags[k] == Tag::Adj {
            k += 1;
        }
        if k > adj_start {
            spans.push((start, k));
        } else {
            k = start + 1;
        }
    }

    let mut seen = HashSet::new();
    let mut ordered: Vec<(usize, usize)> = spans.into_iter().filter(|s| seen.insert(*s)).collect();
    ordered.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)));
    let mut texts = HashSet::new();
    ordered.into_iter().map(|(a, b)| span(a, b)).filter(|t| texts.insert(t.clone())).collect()
}
