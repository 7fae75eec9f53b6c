//! Contract checks shared by the integration tests and the acceptance run.

use std::collections::BTreeSet;
use std::sync::{Arc, Barrier};
use std::thread;

use commonsense_core::inference::{
    decompose_phrases, display_node, expand_query, get_analogy, get_context, Analogy, ContextParams, NodeEntry,
    ScoredConcept,
};
use commonsense_core::normalization::strip_tags;
use commonsense_core::profile::ProfileQuery;
use commonsense_core::relation::RelationKey;
use commonsense_server::PortRange;
use serde_json::{json, Value as J};

use super::{acquire_ready, fixture, lists, port_url, rpc};

pub fn range(start: u16) -> PortRange {
    PortRange { start, end: start + 99 }
}

pub fn query(lists: [&[&str]; 5]) -> ProfileQuery {
    ProfileQuery::parse(&lists.map(|l| l.to_vec()), &Default::default()).unwrap()
}

pub const ALL: [&[&str]; 5] = [&[], &[], &[], &[], &[]];
pub const SP: [&[&str]; 5] = [&[], &[], &[], &[], &["SP"]];
pub const NOBODY: [&[&str]; 5] = [&[], &[], &[], &["Atlantis"], &[]];

pub fn scored_json(list: &[ScoredConcept]) -> J {
    J::Array(list.iter().map(|c| json!({"concept": c.concept, "score": c.score})).collect())
}

pub fn entries_json(list: &[NodeEntry]) -> J {
    J::Array(
        list.iter()
            .map(|e| {
                json!({"type": e.relation.rtype, "param1": e.relation.param1, "param2": e.relation.param2,
                       "f": e.relation.f, "i": e.relation.i, "ids": e.ids, "sentence": e.sentence})
            })
            .collect(),
    )
}

pub fn key_json(k: &RelationKey) -> J {
    json!({"type": k.rtype, "param1": k.param1, "param2": k.param2})
}

pub fn analogy_json(a: &Analogy) -> J {
    json!({
        "correspondences": a.correspondences.iter().map(|c| json!({
            "base": c.base, "target": c.target, "systematicity": c.systematicity, "literal": c.literal,
            "supporting": c.supporting.iter().map(|(b, t)| json!({"base": key_json(b), "target": key_json(t)})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "total_systematicity": a.total_systematicity,
    })
}

/// Concurrent acquires build once and share a port; repeated acquires are stable.
pub fn fifty_concurrent_acquires_share_one_build_and_port(start: u16) {
    let fx = fixture(range(start));
    let url = fx.url();
    let barrier = Arc::new(Barrier::new(50));
    let handles: Vec<_> = (0..50)
        .map(|_| {
            let (url, barrier) = (url.clone(), Arc::clone(&barrier));
            thread::spawn(move || {
                barrier.wait();
                rpc(&url, "getApi", &lists(SP)).unwrap()
            })
        })
        .collect();
    let replies: Vec<J> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    let ports: BTreeSet<i64> = replies.iter().map(|r| r["port"].as_i64().unwrap()).collect();
    assert_eq!(ports.len(), 1, "{replies:?}");
    assert!(replies.iter().all(|r| r["state"] == "building" || r["state"] == "ready"));
    let port = acquire_ready(&url, &lists(SP));
    assert_eq!(i64::from(port), *ports.first().unwrap());
    assert_eq!(fx.repo.build_count(), 1);

    for _ in 0..5 {
        assert_eq!(acquire_ready(&url, &lists(SP)), port);
    }
    // list order inside a query does not matter
    let reordered = lists([&[], &[], &[], &[], &["SP", "SP"]]);
    assert_eq!(acquire_ready(&url, &reordered), port);
    let other = acquire_ready(&url, &lists(ALL));
    assert_ne!(other, port);
    assert_eq!(fx.repo.build_count(), 2);

    let listed = rpc(&url, "listInstances", &[]).unwrap();
    let listed_ports: BTreeSet<i64> = listed.as_array().unwrap().iter().map(|i| i["port"].as_i64().unwrap()).collect();
    assert_eq!(listed_ports, BTreeSet::from([i64::from(port), i64::from(other)]));
}

/// Every method answers over the wire what the library answers in process.
pub fn dispatch_equals_in_process_calls(start: u16) {
    let fx = fixture(range(start));
    let url = fx.url();
    let port = acquire_ready(&url, &lists(ALL));
    let inst = port_url(port);
    let net = fx.repo.materialize(&query(ALL)).unwrap();
    let services = &fx.services;
    let concepts: BTreeSet<String> = net.concepts().map(strip_tags).collect();
    assert!(concepts.len() >= 10);

    for c in &concepts {
        let direct = get_context(&net, &[c], ContextParams::default()).unwrap();
        assert_eq!(rpc(&inst, "get_context", &[json!(c)]).unwrap(), scored_json(&direct), "{c}");
        for (depth, decay) in [(1, 0.5), (3, 0.25)] {
            let direct = get_context(&net, &[c, "study"], ContextParams { depth, decay }).unwrap();
            let remote = rpc(&inst, "get_context", &[json!([c, "study"]), json!(depth), json!(decay)]).unwrap();
            assert_eq!(remote, scored_json(&direct), "{c} {depth} {decay}");
        }

        let direct = display_node(&net, c, &services.renderer);
        assert_eq!(rpc(&inst, "display_node", &[json!(c)]).unwrap(), entries_json(&direct), "{c}");

        let direct = expand_query(c, &net, services.morphology.as_ref());
        let expected = json!({"lemma": direct.lemma, "substring_hits": direct.substring_hits,
                              "context": scored_json(&direct.context), "concepts": direct.concepts()});
        assert_eq!(rpc(&inst, "expand_query", &[json!(c)]).unwrap(), expected, "{c}");
    }

    for expr in ["study in a red office", "computer", "a beautiful flower in the garden", "play games"] {
        let direct = decompose_phrases(expr, services.morphology.as_ref());
        assert_eq!(rpc(&inst, "decompose_phrases", &[json!(expr)]).unwrap(), json!(direct), "{expr}");
    }

    for target in [ALL, SP] {
        let direct = get_analogy(&net, &fx.repo.materialize(&query(target)).unwrap()).unwrap();
        let remote = rpc(&inst, "get_analogy", &lists(target)).unwrap();
        assert_eq!(remote, analogy_json(&direct));
        let nested = rpc(&inst, "get_analogy", &[J::Array(lists(target))]).unwrap();
        assert_eq!(nested, remote);
    }
    // a display with ids pointing back at statements, with markup-sensitive text intact
    let shown = rpc(&inst, "display_node", &[json!("computer")]).unwrap();
    assert!(shown.as_array().unwrap().iter().any(|e| e["sentence"] == "A computer is used for study"));
}
