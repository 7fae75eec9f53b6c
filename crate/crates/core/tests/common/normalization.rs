//! Normalization properties and the variant-corpus reconciliation check.

use std::collections::{BTreeSet, HashMap};

use commonsense_core::normalization::{normalize_phrase, strip_tags, tagged_phrase, tokenize, LexiconMorphology, Tag};
use commonsense_core::pipeline::Pipeline;
use commonsense_core::profile::ProfileQuery;
use commonsense_core::relaxation::HeuristicFlags;
use commonsense_core::resources::{Lang, LEXICON_EN, LEXICON_PT};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const VARIANTS: &str = include_str!("../fixtures/variants_en.txt");

fn lexicon_words(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect()
}

fn arb_phrase(lang: Lang) -> impl Strategy<Value = String> {
    let known = lexicon_words(if lang == Lang::En { LEXICON_EN } else { LEXICON_PT });
    let word = prop_oneof![
        4 => proptest::sample::select(known),
        1 => "[a-z]{2,8}",
        1 => "[A-Z][a-z]{2,8}",
        1 => Just("São".to_string()),
    ];
    proptest::collection::vec(word, 1..7).prop_map(|w| w.join(" "))
}

fn check_phrase(phrase: &str, morph: &LexiconMorphology) -> Result<(), TestCaseError> {
    let once = normalize_phrase(phrase, morph);
    let twice = normalize_phrase(&tagged_phrase(&once), morph);
    prop_assert_eq!(tagged_phrase(&twice), tagged_phrase(&once));
    prop_assert!(once.iter().all(|t| t.tag != Tag::Art));
    let surfaces: BTreeSet<&str> = tokenize(phrase).into_iter().collect();
    for t in once.iter().filter(|t| t.tag == Tag::Propn) {
        prop_assert_eq!(&t.lemma, &t.surface);
        prop_assert!(surfaces.contains(t.surface.as_str()));
    }
    prop_assert!(once.iter().all(|t| !t.lemma.is_empty()));
    Ok(())
}

/// Idempotence, article elimination and proper-name preservation on random phrases.
pub fn phrase_properties(lang: Lang, cases: u32) {
    let morph = LexiconMorphology::bundled(lang);
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    if let Err(e) = runner.run(&arb_phrase(lang), |p| check_phrase(&p, &morph)) {
        panic!("{lang:?}: {e}");
    }
}

pub fn proper_names_survive() {
    let morph = LexiconMorphology::bundled(Lang::Pt);
    let toks = normalize_phrase("Maria mora em São Carlos", &morph);
    let propn: Vec<&str> = toks.iter().filter(|t| t.tag == Tag::Propn).map(|t| t.surface.as_str()).collect();
    assert_eq!(propn, ["Maria", "São", "Carlos"]);
}

/// Independent lemma table for every word of the variant corpus.
fn oracle_lemma(word: &str) -> Option<&'static str> {
    let table: HashMap<&str, &str> = [
        ("computer", "computer"),
        ("computers", "computer"),
        ("notebook", "notebook"),
        ("notebooks", "notebook"),
        ("knife", "knife"),
        ("knives", "knife"),
        ("book", "book"),
        ("books", "book"),
        ("car", "car"),
        ("cars", "car"),
        ("bed", "bed"),
        ("beds", "bed"),
        ("cup", "cup"),
        ("cups", "cup"),
        ("study", "study"),
        ("studies", "study"),
        ("studying", "study"),
        ("write", "write"),
        ("writing", "write"),
        ("wrote", "write"),
        ("cut", "cut"),
        ("cuts", "cut"),
        ("cutting", "cut"),
        ("read", "read"),
        ("reading", "read"),
        ("reads", "read"),
        ("drive", "drive"),
        ("driving", "drive"),
        ("drove", "drive"),
        ("sleep", "sleep"),
        ("sleeping", "sleep"),
        ("slept", "sleep"),
        ("drink", "drink"),
        ("drinking", "drink"),
        ("drank", "drink"),
        ("coffee", "coffee"),
        ("coffees", "coffee"),
        ("chair", "chair"),
        ("chairs", "chair"),
        ("kitchen", "kitchen"),
        ("kitchens", "kitchen"),
        ("desk", "desk"),
        ("desks", "desk"),
        ("flower", "flower"),
        ("flowers", "flower"),
        ("garden", "garden"),
        ("gardens", "garden"),
        ("school", "school"),
        ("schools", "school"),
        ("screw", "screw"),
        ("screws", "screw"),
        ("table", "table"),
        ("tables", "table"),
        ("dog", "dog"),
        ("dogs", "dog"),
        ("animal", "animal"),
        ("animals", "animal"),
        ("rose", "rose"),
        ("roses", "rose"),
        ("sun", "sun"),
        ("suns", "sun"),
        ("star", "star"),
        ("stars", "star"),
        ("cat", "cat"),
        ("cats", "cat"),
        ("eat", "eat"),
        ("eating", "eat"),
        ("ate", "eat"),
        ("food", "food"),
        ("foods", "food"),
        ("have", "have"),
        ("lunch", "lunch"),
    ]
    .into_iter()
    .collect();
    table.get(word.to_lowercase().as_str()).copied()
}

const ARTICLES: [&str; 4] = ["a", "an", "the", "a(n)"];

pub fn variant_corpus_reconciles() {
    let pipeline = Pipeline::bundled(Lang::En, HeuristicFlags::none()).unwrap();
    let extracted = pipeline.extract_text(VARIANTS).unwrap();
    assert_eq!(extracted.lines().count(), 50, "every variant statement is extracted");
    let (normalized, stats) = pipeline.normalize_text(&extracted).unwrap();
    assert_eq!(stats.misses, 0);

    let params = |text: &str| -> Vec<(String, String)> {
        text.lines()
            .map(|l| {
                let q: Vec<&str> = l.split('"').collect();
                (q[1].to_string(), q[3].to_string())
            })
            .collect()
    };
    let oracle = |phrase: &str| -> String {
        phrase
            .split(' ')
            .filter(|w| !ARTICLES.contains(&w.to_lowercase().as_str()))
            .map(|w| oracle_lemma(w).unwrap_or_else(|| panic!("oracle table lacks `{w}`")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let before = params(&extracted);
    let after = params(&normalized);
    for ((b1, b2), (a1, a2)) in before.iter().zip(&after) {
        assert_eq!(strip_tags(a1), oracle(b1));
        assert_eq!(strip_tags(a2), oracle(b2));
    }
    let distinct = |ps: &[(String, String)]| -> usize {
        ps.iter().flat_map(|(a, b)| [strip_tags(a), strip_tags(b)]).collect::<BTreeSet<_>>().len()
    };
    assert!(distinct(&after) < distinct(&before));

    let report = pipeline.metrics(VARIANTS, &ProfileQuery::all()).unwrap();
    assert!(report.after.nodes < report.before.nodes, "{report:?}");
    assert!(report.after.relations < report.before.relations, "{report:?}");
}
