//! Rendering a relation and extracting the sentence gives the relation back.

use commonsense_core::extraction::Extractor;
use commonsense_core::inference::Renderer;
use commonsense_core::profile::ProfileVocabulary;
use commonsense_core::relation::TypeRegistry;
use commonsense_core::resources::Lang;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const WORDS_EN: [&str; 12] =
    ["dog", "garden", "red", "computer", "study", "old", "coffee", "bed", "sleep", "school", "knife", "paper"];
const WORDS_PT: [&str; 12] = [
    "cachorro",
    "jardim",
    "vermelho",
    "computador",
    "estudar",
    "velho",
    "café",
    "cama",
    "dormir",
    "escola",
    "faca",
    "papel",
];

fn phrase(words: &'static [&'static str]) -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select(words), 1..4).prop_map(|w| w.join(" "))
}

fn tools(lang: Lang) -> (Renderer, Extractor) {
    let types = TypeRegistry::with_defaults();
    (Renderer::bundled(lang, types.clone()), Extractor::bundled(lang, types).unwrap())
}

fn round_trip(
    (renderer, extractor): &(Renderer, Extractor),
    rtype: &str,
    p1: &str,
    p2: &str,
) -> Result<(), TestCaseError> {
    let sentence = renderer.render_parts(rtype, p1, p2);
    let line = format!("{sentence}$$F$$30_45$$mestrado$$Campinas$$SP$$7");
    let got = extractor.extract_line(&line, &ProfileVocabulary::default()).unwrap();
    prop_assert_eq!(got.len(), 1, "{}", sentence);
    prop_assert_eq!(
        (got[0].rtype.as_str(), got[0].param1.as_str(), got[0].param2.as_str()),
        (rtype, p1, p2),
        "{}",
        sentence
    );
    Ok(())
}

fn templated(lang: Lang) -> Vec<String> {
    Renderer::bundled(lang, TypeRegistry::with_defaults()).templated_types().map(str::to_string).collect()
}

/// Random templated relations in one language survive render then extract.
pub fn random_round_trips(lang: Lang, cases: u32) {
    let words: &'static [&'static str] = if lang == Lang::En { &WORDS_EN } else { &WORDS_PT };
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    let strategy = (proptest::sample::select(templated(lang)), phrase(words), phrase(words));
    let tools = tools(lang);
    if let Err(e) = runner.run(&strategy, |(rtype, p1, p2)| round_trip(&tools, &rtype, &p1, &p2)) {
        panic!("{lang:?}: {e}");
    }
}

pub fn every_templated_type_is_extractable() {
    for lang in [Lang::En, Lang::Pt] {
        let words = if lang == Lang::En { WORDS_EN } else { WORDS_PT };
        let types = templated(lang);
        assert!(types.len() >= 4);
        let tools = tools(lang);
        for rtype in types {
            round_trip(&tools, &rtype, words[0], &format!("{} {}", words[1], words[2])).unwrap();
        }
    }
}
