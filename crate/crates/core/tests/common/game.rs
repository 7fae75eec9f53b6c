//! Quiz service fixture and the checks on synonyms, dice, guesses and collection records.

use std::collections::BTreeSet;
use std::sync::Arc;

use commonsense_core::error::GameError;
use commonsense_core::filter::NetworkRepository;
use commonsense_core::game::{
    normalize_answer, synonym_statements, CardClues, Clue, ClueSource, GameConfig, GameService, Outcome, SecretWord,
    WizardStep, PLAY_ACTIVITY, SYNONYM_ACTIVITY,
};
use commonsense_core::inference::Renderer;
use commonsense_core::normalization::LexiconMorphology;
use commonsense_core::pipeline::Pipeline;
use commonsense_core::profile::ProfileAttrs;
use commonsense_core::relation::TypeRegistry;
use commonsense_core::relaxation::{HeuristicFlags, RelationSet};
use commonsense_core::resources::Lang;
use commonsense_core::store::{parse_templates, StatementStore};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS: &str = "\
Aids is a(n) sexually transmitted disease$$M$$18_29$$mestrado$$Clementina$$SP$$1
A condom is used for aids$$F$$18_29$$mestrado$$Clementina$$SP$$2
Flu is a(n) disease$$M$$30_45$$2_completo$$Campinas$$SP$$3
You usually find a nurse in a hospital$$F$$30_45$$2_completo$$Campinas$$SP$$4
Sida is typically dangerous$$M$$18_29$$mestrado$$Clementina$$SP$$5
";

pub fn editor() -> ProfileAttrs {
    super::profile_from("F", "30_45", "mestrado", "São Carlos", "SP")
}

pub fn player() -> ProfileAttrs {
    super::profile_from("M", "13_17", "2_incompleto", "Clementina", "SP")
}

pub struct Fixture {
    pub service: GameService,
    _dir: tempfile::TempDir,
}

pub fn fixture(seed: u64) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::bundled(Lang::En, HeuristicFlags::default()).unwrap();
    let (normalized, _) = p.normalize_text(&p.extract_text(CORPUS).unwrap()).unwrap();
    let (relaxed, _) = p.relax_text(&normalized).unwrap();
    let set = RelationSet::parse_lines(&relaxed, &p.schema).unwrap();
    let repo = NetworkRepository::new(dir.path(), set, p.flags, p.schema.clone()).unwrap();
    let store = StatementStore::new(parse_templates(Lang::En.templates()).unwrap(), vec!["chair".into()], seed);
    let service = GameService::new(
        Arc::new(store),
        Arc::new(repo),
        Arc::new(LexiconMorphology::bundled(Lang::En)),
        Renderer::bundled(Lang::En, TypeRegistry::with_defaults()),
        GameConfig { min_reveals: 1, rng_seed: seed },
    );
    Fixture { service, _dir: dir }
}

pub fn authored(text: &str) -> Clue {
    Clue { text: text.into(), source: ClueSource::Authored }
}

/// Runs the wizard to publication with one card per topic.
pub fn publish(s: &GameService, topics: &[&str], clues_per_card: usize) -> String {
    let g = s.create_game(editor());
    s.wizard_advance(&g.id, WizardStep::Profile { query: vec![vec![]; 5] }).unwrap();
    s.wizard_advance(&g.id, WizardStep::Theme { theme: "healthcare".into() }).unwrap();
    s.wizard_advance(&g.id, WizardStep::Topics { topics: topics.iter().map(|t| t.to_string()).collect() }).unwrap();
    let words = topics
        .iter()
        .map(|t| SecretWord {
            topic: t.to_string(),
            secret_word: format!("word{t}"),
            synonyms: vec![format!("alias{t}")],
        })
        .collect();
    s.wizard_advance(&g.id, WizardStep::SecretWords { words }).unwrap();
    let cards = (0..topics.len())
        .map(|k| CardClues { card: k, clues: (1..=clues_per_card).map(|n| authored(&format!("hint {n}"))).collect() })
        .collect();
    s.wizard_advance(&g.id, WizardStep::Clues { cards }).unwrap();
    s.wizard_advance(&g.id, WizardStep::Review).unwrap();
    s.wizard_advance(&g.id, WizardStep::Publish).unwrap();
    g.id
}

pub fn synonym_statement_counts() {
    let f = fixture(1);
    let pool = ["s1", "s2", "s3", "s4", "s5"];
    for n in 1..=5 {
        let syns: Vec<String> = pool[..n].iter().map(|s| s.to_string()).collect();
        let expected = n + n * (n - 1) / 2;
        assert_eq!(synonym_statements("aids", &syns).unwrap().len(), expected);
        let before = f.service.store().statements_in(SYNONYM_ACTIVITY).len();
        let stored = f.service.record_synonyms("aids", &syns, &editor()).unwrap();
        assert_eq!(stored.len(), expected);
        assert!(stored.iter().all(|s| s.profile == editor()));
        assert_eq!(f.service.store().statements_in(SYNONYM_ACTIVITY).len(), before + expected);
        let pairs: BTreeSet<BTreeSet<String>> =
            stored.iter().map(|s| s.text.split(" is also known as ").map(str::to_string).collect()).collect();
        assert_eq!(pairs.len(), expected, "all pairs distinct");
    }
    let dup: Vec<String> = vec!["x".into(), "x".into()];
    assert!(matches!(f.service.record_synonyms("aids", &dup, &editor()), Err(GameError::DuplicateSynonym(_))));
}

pub fn dice_are_uniform() {
    let f = fixture(5);
    let topics = ["a", "b", "c", "d", "e", "f"];
    let id = publish(&f.service, &topics, 1);
    let mut counts = [0u32; 6];
    for _ in 0..6000 {
        let t = f.service.roll_dice(&id).unwrap();
        counts[topics.iter().position(|x| *x == t).unwrap()] += 1;
    }
    let chi2: f64 = counts.iter().map(|&c| (f64::from(c) - 1000.0).powi(2) / 1000.0).sum();
    // critical value of chi-square with 5 degrees of freedom at p = 0.001
    assert!(chi2 < 20.515, "chi2 {chi2} counts {counts:?}");
    assert!(counts.iter().all(|&c| (800..=1200).contains(&c)), "{counts:?}");

    let single = publish(&f.service, &["only"], 1);
    assert!((0..50).all(|_| f.service.roll_dice(&single).unwrap() == "only"));
}

pub fn guesses_match_secret_and_synonyms_after_normalization() {
    let f = fixture(7);
    let s = &f.service;
    let g = s.create_game(editor());
    s.wizard_advance(&g.id, WizardStep::Profile { query: vec![vec![]; 5] }).unwrap();
    s.wizard_advance(&g.id, WizardStep::Theme { theme: "healthcare".into() }).unwrap();
    s.wizard_advance(&g.id, WizardStep::Topics { topics: vec!["illness".into()] }).unwrap();
    s.wizard_advance(
        &g.id,
        WizardStep::SecretWords {
            words: vec![SecretWord {
                topic: "illness".into(),
                secret_word: "disease".into(),
                synonyms: vec!["sickness".into(), "aids".into()],
            }],
        },
    )
    .unwrap();
    s.wizard_advance(
        &g.id,
        WizardStep::Clues {
            cards: vec![CardClues {
                card: 0,
                clues: vec![authored("Makes you feel bad"), authored("Doctors treat it")],
            }],
        },
    )
    .unwrap();
    s.wizard_advance(&g.id, WizardStep::Review).unwrap();
    s.wizard_advance(&g.id, WizardStep::Publish).unwrap();

    let session = s.start_session(&g.id, player()).unwrap();
    s.roll(&session.id).unwrap();
    s.reveal_clue(&session.id, 2).unwrap();
    for guess in ["disease", "Diseases", "DISEASE", "sickness", "aids", " Aids "] {
        assert_eq!(s.submit_guess(&session.id, guess).unwrap().outcome, Outcome::Correct, "{guess}");
    }
    let open = s.submit_guess(&session.id, "hiv").unwrap();
    assert_eq!(open.outcome, Outcome::Open);
    assert_eq!(open.records.len(), 1);
    let record = s.store().get(open.records[0]).unwrap();
    assert_eq!(record.text, "hiv is associated with Doctors treat it");
    assert_eq!(record.profile, player());

    let morph = LexiconMorphology::bundled(Lang::En);
    assert_eq!(normalize_answer("Diseases", &morph), normalize_answer("disease", &morph));
}

pub fn collection_records_equal_revealed_clues_at_each_guess() {
    let f = fixture(8);
    let s = &f.service;
    let id = publish(s, &["a", "b", "c"], 10);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut expected = 0;
    let words = ["worda", "aliasb", "tree", "river", "idea"];
    for _ in 0..30 {
        let session = s.start_session(&id, player()).unwrap();
        for _ in 0..rng.random_range(1..3) {
            let roll = s.roll(&session.id).unwrap();
            let mut hidden: Vec<usize> = (1..=roll.clue_count).collect();
            for _ in 0..rng.random_range(1..5) {
                for _ in 0..rng.random_range(1..4) {
                    if hidden.is_empty() {
                        break;
                    }
                    let k = hidden.remove(rng.random_range(0..hidden.len()));
                    s.reveal_clue(&session.id, k).unwrap();
                }
                let guess = words.choose(&mut rng).unwrap();
                let revealed = s.session(&session.id).unwrap().revealed.len();
                let result = s.submit_guess(&session.id, guess).unwrap();
                assert_eq!(result.records.len(), revealed);
                expected += revealed;
            }
        }
        let played = s.session(&session.id).unwrap();
        assert!(played.guesses.iter().all(|g| g.statements.len() == g.revealed.len()));
    }
    assert_eq!(s.store().statements_in(PLAY_ACTIVITY).len(), expected);
}
