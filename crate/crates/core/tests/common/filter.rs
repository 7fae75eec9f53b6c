//! Profile filtering checked against a brute-force rebuild from the filtered export.

use std::collections::{BTreeMap, BTreeSet};

use commonsense_core::filter::build_conceptnet;
use commonsense_core::pipeline::Pipeline;
use commonsense_core::profile::{ProfileAttrs, ProfileQuery};
use commonsense_core::relaxation::{HeuristicFlags, RelationSet};
use commonsense_core::resources::Lang;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Key = (String, String, String);

#[derive(Debug, Clone)]
struct Entry {
    f: u32,
    i: u32,
    ids: BTreeSet<u64>,
}

fn line_profile(line: &str) -> ProfileAttrs {
    let parts: Vec<&str> = line.split("$$").collect();
    super::profile_from(parts[1], parts[2], parts[3], parts[4], parts[5])
}

/// Splits an intermediate relation line without the library parser.
fn parse_intermediate(line: &str) -> (Key, Entry) {
    let rtype = line[1..line.find(' ').unwrap()].to_string();
    let q: Vec<&str> = line.split('"').collect();
    let ids = q[15].split(';').map(|s| s.parse().unwrap()).collect();
    let (f, i) = q[17].split_once(';').unwrap();
    let entry =
        Entry { f: f.trim_start_matches("f=").parse().unwrap(), i: i.trim_start_matches("i=").parse().unwrap(), ids };
    ((rtype, q[1].to_string(), q[3].to_string()), entry)
}

fn render(net: &BTreeMap<Key, Entry>) -> String {
    net.iter()
        .map(|((t, a, b), e)| {
            let ids: Vec<String> = e.ids.iter().map(u64::to_string).collect();
            format!("({t} \"{a}\" \"{b}\" \"f={};i={}\" \"{}\")\n", e.f, e.i, ids.join(";"))
        })
        .collect()
}

/// Filters the export lines first, relaxes only the survivors, then merges
/// and composes IsA with PropertyOf over a snapshot.
pub fn oracle(p: &Pipeline, corpus: &str, q: &ProfileQuery) -> String {
    let subset: String = corpus.lines().filter(|l| q.matches(&line_profile(l))).map(|l| format!("{l}\n")).collect();
    let (normalized, _) = p.normalize_text(&p.extract_text(&subset).unwrap()).unwrap();
    let (relaxed, _) = p.relax_text(&normalized).unwrap();
    let mut net: BTreeMap<Key, Entry> = BTreeMap::new();
    for line in relaxed.lines() {
        let (k, e) = parse_intermediate(line);
        net.entry(k)
            .and_modify(|x| {
                x.f += e.f;
                x.i += e.i;
                x.ids.extend(&e.ids);
            })
            .or_insert(e);
    }
    let snapshot = net.clone();
    for ((t1, a, b), is_a) in &snapshot {
        if t1 != "IsA" || a == b {
            continue;
        }
        for ((t2, b2, c), prop) in &snapshot {
            if t2 != "PropertyOf" || b2 != b {
                continue;
            }
            let ids: BTreeSet<u64> = is_a.ids.union(&prop.ids).copied().collect();
            let key = ("PropertyOf".to_string(), a.clone(), c.clone());
            match net.get_mut(&key) {
                None => {
                    net.insert(key, Entry { f: 0, i: 1, ids });
                }
                Some(e) if !ids.is_subset(&e.ids) => {
                    e.i += 1;
                    e.ids.extend(ids);
                }
                Some(_) => {}
            }
        }
    }
    render(&net)
}

pub fn relaxed_set(p: &Pipeline, corpus: &str) -> RelationSet {
    let (normalized, _) = p.normalize_text(&p.extract_text(corpus).unwrap()).unwrap();
    let (relaxed, _) = p.relax_text(&normalized).unwrap();
    RelationSet::parse_lines(&relaxed, &p.schema).unwrap()
}

pub fn filtering_matches_rebuild_from_filtered_export() {
    let p = Pipeline::bundled(Lang::En, HeuristicFlags::default()).unwrap();
    let mut nonempty = 0;
    let mut composed = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 20 + (seed as usize % 81);
        let corpus = super::random_corpus(&mut rng, n);
        let set = relaxed_set(&p, &corpus);
        for _ in 0..20 {
            let q = super::random_query(&mut rng);
            let net = build_conceptnet(&q, &set, &p.flags);
            let text = net.to_text();
            assert_eq!(text, oracle(&p, &corpus, &q), "seed {seed} query {q}");
            nonempty += usize::from(!net.is_empty());
            composed += net.relations().filter(|r| r.rtype == "PropertyOf" && r.f == 0).count();
        }
    }
    assert!(nonempty > 1000, "{nonempty}");
    assert!(composed > 0);
}
