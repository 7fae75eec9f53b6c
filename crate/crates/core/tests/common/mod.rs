//! Generators shared by the property and oracle tests.
#![allow(dead_code)]

pub mod filter;
pub mod game;
pub mod inference;
pub mod normalization;
pub mod render;

use commonsense_core::profile::{AgeGroup, Gender, ProfileAttrs, ProfileQuery};
use commonsense_core::relation::Relation;
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;

pub const GENDERS: [&str; 2] = ["M", "F"];
pub const AGES: [&str; 6] = ["lt_12", "13_17", "18_29", "30_45", "46_65", "gt_65"];
pub const EDUCATIONS: [&str; 3] = ["2_incompleto", "2_completo", "mestrado"];
pub const CITIES: [&str; 3] = ["Clementina", "São Carlos", "Campinas"];
pub const STATES: [&str; 2] = ["SP", "MG"];

pub fn profile_from(g: &str, a: &str, e: &str, c: &str, s: &str) -> ProfileAttrs {
    ProfileAttrs {
        gender: g.parse::<Gender>().unwrap(),
        age_group: a.parse::<AgeGroup>().unwrap(),
        education: e.into(),
        city: c.into(),
        state: s.into(),
    }
}

pub fn random_profile<R: Rng>(rng: &mut R) -> ProfileAttrs {
    profile_from(
        GENDERS.choose(rng).unwrap(),
        AGES[..3].choose(rng).unwrap(),
        EDUCATIONS.choose(rng).unwrap(),
        CITIES.choose(rng).unwrap(),
        STATES.choose(rng).unwrap(),
    )
}

fn subset<R: Rng>(rng: &mut R, pool: &[&str]) -> Vec<String> {
    if rng.random_bool(0.4) {
        return Vec::new();
    }
    let picked: Vec<String> = pool.iter().filter(|_| rng.random_bool(0.5)).map(|s| s.to_string()).collect();
    picked
}

pub fn random_query<R: Rng>(rng: &mut R) -> ProfileQuery {
    let lists = vec![
        subset(rng, &GENDERS),
        subset(rng, &AGES[..3]),
        subset(rng, &EDUCATIONS),
        subset(rng, &CITIES),
        subset(rng, &STATES),
    ];
    ProfileQuery::parse(&lists, &Default::default()).unwrap()
}

const NOUNS: [&str; 12] = [
    "computer",
    "computers",
    "notebook",
    "book",
    "books",
    "desk",
    "chair",
    "chairs",
    "rose",
    "flower",
    "flowers",
    "dog",
];
const VERBS: [&str; 8] = ["study", "studying", "write", "wrote", "read", "reading", "play", "played"];
const ADJS: [&str; 5] = ["red", "beautiful", "expensive", "new", "old"];

/// One English sentence shaped like a collection template.
pub fn random_sentence<R: Rng>(rng: &mut R) -> String {
    let noun = |rng: &mut R| *NOUNS.choose(rng).unwrap();
    match rng.random_range(0..7) {
        0 => format!("A {} is used for {}", noun(rng), VERBS.choose(rng).unwrap()),
        1 => format!("You usually find a {} in a {}", noun(rng), noun(rng)),
        2 => format!("You hardly ever find a {} in a {}", noun(rng), noun(rng)),
        3 => format!("{} is a(n) {}", noun(rng), noun(rng)),
        4 => format!("{} is a(n) {}", noun(rng), ADJS.choose(rng).unwrap()),
        5 => format!("{} is typically {}", noun(rng), ADJS.choose(rng).unwrap()),
        _ => format!(
            "You would {} {} because you want to {}",
            VERBS.choose(rng).unwrap(),
            noun(rng),
            VERBS.choose(rng).unwrap()
        ),
    }
}

/// Export lines with ids 1..=n and random profiles.
pub fn random_corpus<R: Rng>(rng: &mut R, n: usize) -> String {
    (1..=n)
        .map(|id| {
            let p = random_profile(rng);
            let [g, a, e, c, s] = p.codes();
            format!("{}$${g}$${a}$${e}$${c}$${s}$${id}\n", random_sentence(rng))
        })
        .collect()
}

pub fn arb_phrase() -> impl Strategy<Value = String> {
    "[a-zà-ú][a-zà-ú0-9()/_ -]{0,20}[a-z]".prop_map(|s| s)
}

pub fn arb_relation(types: Vec<String>) -> impl Strategy<Value = Relation> {
    let profile = prop_oneof![
        Just(None),
        (0..2usize, 0..6usize, 0..3usize, 0..3usize, 0..2usize).prop_map(|(g, a, e, c, s)| Some(profile_from(
            GENDERS[g],
            AGES[a],
            EDUCATIONS[e],
            CITIES[c],
            STATES[s]
        ))),
    ];
    (
        proptest::sample::select(types),
        arb_phrase(),
        arb_phrase(),
        0u32..50,
        0u32..50,
        proptest::collection::hash_set(1u64..100_000, 1..8),
        profile,
    )
        .prop_filter("f + i >= 1", |(_, _, _, f, i, _, _)| f + i >= 1)
        .prop_map(|(rtype, param1, param2, f, i, ids, profile)| Relation {
            rtype,
            param1,
            param2,
            f,
            i,
            ids: ids.into_iter().collect(),
            profile,
        })
}
