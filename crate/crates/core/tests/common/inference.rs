//! Context retrieval and analogy checked against exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use commonsense_core::inference::{get_analogy, get_context, systematicity, ContextParams};
use commonsense_core::network::ConceptNet;
use commonsense_core::profile::ProfileQuery;
use commonsense_core::relation::Relation;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TYPES: [&str; 3] = ["IsA", "UsedFor", "LocationOf"];

pub fn rel(t: &str, a: &str, b: &str, f: u32, i: u32) -> Relation {
    Relation { rtype: t.into(), param1: a.into(), param2: b.into(), f, i, ids: vec![1], profile: None }
}

pub fn net(rels: Vec<Relation>) -> ConceptNet {
    ConceptNet::from_relations(ProfileQuery::all(), rels)
}

pub fn random_net<R: Rng>(rng: &mut R, concepts: &[String], max_rels: usize) -> ConceptNet {
    let n = rng.random_range(1..=max_rels);
    let rels = (0..n)
        .map(|_| {
            rel(
                TYPES.choose(rng).unwrap(),
                concepts.choose(rng).unwrap(),
                concepts.choose(rng).unwrap(),
                rng.random_range(0..4),
                rng.random_range(0..3),
            )
        })
        .filter(|r| r.f + r.i > 0)
        .collect::<Vec<_>>();
    if rels.is_empty() {
        return net(vec![rel("IsA", &concepts[0], &concepts[1 % concepts.len()], 1, 0)]);
    }
    net(rels)
}

// ---------- context ----------

/// Score map by walking every simple path explicitly.
pub fn context_oracle(net: &ConceptNet, seeds: &[&str], depth: usize, decay: f64) -> BTreeMap<String, f64> {
    let edges: Vec<(String, String, f64)> = net
        .relations()
        .filter(|r| r.param1 != r.param2)
        .flat_map(|r| {
            let w = (1.0 + f64::from(r.f) + f64::from(r.i)).ln();
            [(r.param1.clone(), r.param2.clone(), w), (r.param2.clone(), r.param1.clone(), w)]
        })
        .collect();
    let present: Vec<&str> = seeds.iter().copied().filter(|s| net.concepts().any(|c| c == *s)).collect();
    let mut per_seed: Vec<BTreeMap<String, f64>> = Vec::new();
    for seed in &present {
        let mut act = BTreeMap::new();
        // (path nodes, product)
        let mut frontier: Vec<(Vec<String>, f64)> = vec![(vec![seed.to_string()], 1.0)];
        for len in 1..=depth {
            let mut next = Vec::new();
            for (path, product) in &frontier {
                let last = path.last().unwrap();
                for (a, b, w) in edges.iter().filter(|(a, _, _)| a == last) {
                    let _ = a;
                    if path.contains(b) {
                        continue;
                    }
                    let p = product * w;
                    *act.entry(b.clone()).or_insert(0.0) += p * decay.powi(len as i32 - 1);
                    let mut longer = path.clone();
                    longer.push(b.clone());
                    next.push((longer, p));
                }
            }
            frontier = next;
        }
        per_seed.push(act);
    }
    let mut total: BTreeMap<String, f64> = BTreeMap::new();
    for act in &per_seed {
        for (c, s) in act {
            *total.entry(c.clone()).or_insert(0.0) += s;
        }
    }
    if per_seed.len() > 1 {
        for (c, s) in total.iter_mut() {
            if per_seed.iter().all(|a| a.contains_key(c)) {
                *s *= per_seed.len() as f64;
            }
        }
    }
    total.retain(|c, _| !present.contains(&c.as_str()));
    total
}

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("c{k}")).collect()
}

pub fn context_matches_path_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pool = labels(10);
    for case in 0..300 {
        let g = random_net(&mut rng, &pool, 30);
        let depth = rng.random_range(1..=3);
        let decay = [0.5, 0.25, 0.9, 1.0].choose(&mut rng).copied().unwrap();
        let k = rng.random_range(1..=3);
        let seeds: Vec<&str> = pool.choose_multiple(&mut rng, k).map(String::as_str).collect();
        let got = get_context(&g, &seeds, ContextParams { depth, decay }).unwrap();
        let want = context_oracle(&g, &seeds, depth, decay);
        let got_map: BTreeMap<String, f64> = got.iter().map(|s| (s.concept.clone(), s.score)).collect();
        assert_eq!(got_map.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>(), "case {case}");
        for (c, w) in &want {
            assert!((got_map[c] - w).abs() < 1e-9, "case {case} {c}: {} vs {w}", got_map[c]);
        }
        for pair in got.windows(2) {
            assert!(
                pair[0].score > pair[1].score || (pair[0].score == pair[1].score && pair[0].concept < pair[1].concept)
            );
        }
        assert!(got.iter().all(|s| !seeds.contains(&s.concept.as_str())));
    }
}

// ---------- analogy ----------

/// Best strict score over every partial injection from base to target
/// concepts: a relation pair counts when both endpoints are mapped onto the
/// target's endpoints.
pub fn analogy_optimum(base: &ConceptNet, target: &ConceptNet) -> usize {
    let bs: Vec<String> = base.concepts().map(str::to_string).collect();
    let ts: Vec<String> = target.concepts().map(str::to_string).collect();
    let b_idx: BTreeMap<&str, usize> = bs.iter().enumerate().map(|(k, c)| (c.as_str(), k)).collect();
    let t_idx: BTreeMap<&str, usize> = ts.iter().enumerate().map(|(k, c)| (c.as_str(), k)).collect();
    // relation pairs as index quadruples
    let mut pairs = Vec::new();
    for b in base.relations() {
        for t in target.relations().filter(|t| t.rtype == b.rtype) {
            pairs.push((
                b_idx[b.param1.as_str()],
                b_idx[b.param2.as_str()],
                t_idx[t.param1.as_str()],
                t_idx[t.param2.as_str()],
            ));
        }
    }

    struct Search<'a> {
        pairs: &'a [(usize, usize, usize, usize)],
        n_base: usize,
        n_target: usize,
        map: Vec<Option<usize>>,
        used: Vec<bool>,
        best: usize,
    }

    impl Search<'_> {
        /// Pairs fixed so far, and pairs still open given the next base index.
        fn score(&self, next: usize) -> (usize, usize) {
            let mut done = 0;
            let mut open = 0;
            for &(b1, b2, t1, t2) in self.pairs {
                let decided = b1 < next && b2 < next;
                if decided {
                    if self.map[b1] == Some(t1) && self.map[b2] == Some(t2) {
                        done += 1;
                    }
                } else {
                    let ok = |b: usize, t: usize| b >= next || self.map[b] == Some(t);
                    if ok(b1, t1) && ok(b2, t2) {
                        open += 1;
                    }
                }
            }
            (done, open)
        }

        fn run(&mut self, k: usize) {
            let (done, open) = self.score(k);
            if done + open <= self.best && k > 0 {
                return;
            }
            if k == self.n_base {
                self.best = self.best.max(done);
                return;
            }
            for t in 0..self.n_target {
                if !self.used[t] {
                    self.used[t] = true;
                    self.map[k] = Some(t);
                    self.run(k + 1);
                    self.map[k] = None;
                    self.used[t] = false;
                }
            }
            self.run(k + 1);
        }
    }

    let mut s = Search {
        pairs: &pairs,
        n_base: bs.len(),
        n_target: ts.len(),
        map: vec![None; bs.len()],
        used: vec![false; ts.len()],
        best: 0,
    };
    s.run(0);
    s.best
}

pub fn is_injective(m: &BTreeMap<String, String>) -> bool {
    m.values().collect::<BTreeSet<_>>().len() == m.len()
}

/// A target built by renaming part of the base and perturbing some relations.
pub fn related_pair<R: Rng>(rng: &mut R) -> (ConceptNet, ConceptNet) {
    let n = rng.random_range(3..=8);
    let base_labels = labels(n);
    let base = random_net(rng, &base_labels, 12);
    let mut renamed: Vec<String> =
        (0..n).map(|k| if rng.random_bool(0.6) { format!("t{k}") } else { format!("c{k}") }).collect();
    renamed.shuffle(rng);
    let rename: BTreeMap<&str, &str> =
        base_labels.iter().map(String::as_str).zip(renamed.iter().map(String::as_str)).collect();
    let kept: Vec<Relation> = base.relations().filter(|_| rng.random_bool(0.8)).cloned().collect();
    let mut rels: Vec<Relation> = kept
        .into_iter()
        .map(|mut r| {
            r.param1 = rename[r.param1.as_str()].to_string();
            r.param2 = rename[r.param2.as_str()].to_string();
            if rng.random_bool(0.15) {
                r.rtype = TYPES.choose(rng).unwrap().to_string();
            }
            r
        })
        .collect();
    for _ in 0..rng.random_range(0..3) {
        rels.push(rel(TYPES.choose(rng).unwrap(), renamed.choose(rng).unwrap(), renamed.choose(rng).unwrap(), 1, 0));
    }
    if rels.is_empty() {
        rels.push(rel("IsA", &renamed[0], &renamed[1], 1, 0));
    }
    (base, net(rels))
}

pub fn greedy_analogy_stays_within_ten_percent_of_optimum() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut greedy_sum = 0;
    let mut best_sum = 0;
    for case in 0..200 {
        let (base, target) = if case % 2 == 0 {
            related_pair(&mut rng)
        } else {
            let n = rng.random_range(2..=8);
            let pool = labels(n);
            (random_net(&mut rng, &pool, 10), random_net(&mut rng, &pool, 10))
        };
        let a = get_analogy(&base, &target).unwrap();
        let m = a.mapping();
        assert!(is_injective(&m), "case {case}");
        assert_eq!(a.total_systematicity, systematicity(&base, &target, &m));
        let opt = analogy_optimum(&base, &target);
        assert!(a.total_systematicity <= opt, "case {case}: greedy above optimum");
        assert!(
            a.total_systematicity * 10 >= opt * 9,
            "case {case}: greedy {} vs optimum {opt}\nbase:\n{}target:\n{}",
            a.total_systematicity,
            base.to_text(),
            target.to_text()
        );
        greedy_sum += a.total_systematicity;
        best_sum += opt;
    }
    assert!(best_sum > 0);
    assert!(greedy_sum * 10 >= best_sum * 9);
    assert!(started.elapsed().as_secs() < 60);
}

pub fn identity_analogy_on_random_nets() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..50 {
        let n = rng.random_range(2..=12);
        let g = random_net(&mut rng, &labels(n), 20);
        let a = get_analogy(&g, &g).unwrap();
        assert!(a.correspondences.iter().all(|c| c.literal && c.base == c.target), "case {case}");
        let same_type_pairs: usize = g.relations().count();
        assert_eq!(a.total_systematicity, same_type_pairs, "case {case}");
        let touched: BTreeSet<&str> = g.relations().flat_map(|r| [r.param1.as_str(), r.param2.as_str()]).collect();
        assert_eq!(a.correspondences.len(), touched.len(), "case {case}");
    }
}
