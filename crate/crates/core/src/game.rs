//! Backend of the "What is it?" quiz: the seven-step editor wizard, clue
//! suggestion from a network, and the player loop whose guesses are stored
//! back as statements.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::RegexBuilder;
use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::filter::{NetworkHandle, NetworkRepository};
use crate::inference::{display_node, get_context, ContextParams, Renderer};
use crate::network::ConceptNet;
use crate::normalization::{lemma_phrase, normalize_phrase, MorphologyProvider};
use crate::profile::{ProfileAttrs, ProfileQuery};
use crate::relation::Relation;
use crate::store::{RenderedTemplate, Statement, StatementStore, Template};

pub const THEMES: [&str; 6] =
    ["sexual education", "ethics", "healthcare", "environment", "cultural plurality", "market and consumers"];
pub const MAX_TOPICS: usize = 6;
pub const MAX_CLUES: usize = 10;

pub const SYNONYM_ACTIVITY: &str = "game_synonym";
pub const CLUE_ACTIVITY: &str = "game_clue";
pub const PLAY_ACTIVITY: &str = "game_play";

/// Activities the game writes into the statement store.
pub fn game_templates() -> Vec<Template> {
    [
        (SYNONYM_ACTIVITY, "{dyn} is also known as ___", "ConceptuallyRelatedTo"),
        (CLUE_ACTIVITY, "___", "ConceptuallyRelatedTo"),
        (PLAY_ACTIVITY, "___ is associated with {dyn}", "ConceptuallyRelatedTo"),
    ]
    .into_iter()
    .map(|(a, t, h)| Template::new(a, t, h, Some("game")).expect("game templates are well formed"))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClueSource {
    Suggested,
    Edited,
    Authored,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clue {
    pub text: String,
    pub source: ClueSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Card {
    pub topic: String,
    pub secret_word: String,
    pub synonyms: Vec<String>,
    pub clues: Vec<Clue>,
}

impl Card {
    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |m: String| Err(GameError::InvalidCard(format!("`{}`: {m}", self.secret_word)));
        if self.secret_word.trim().is_empty() {
            return Err(GameError::InvalidCard("empty secret word".into()));
        }
        if self.clues.is_empty() || self.clues.len() > MAX_CLUES {
            return bad(format!("needs 1 to {MAX_CLUES} clues, has {}", self.clues.len()));
        }
        let secret = self.secret_word.to_lowercase();
        for clue in &self.clues {
            if clue.text.trim().is_empty() {
                return bad("empty clue".into());
            }
            if clue.text.to_lowercase().contains(&secret) {
                return bad(format!("clue `{}` reveals the secret word", clue.text));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum GameState {
    /// `step` is the next step the wizard expects.
    Draft {
        step: u8,
    },
    Published,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameInstance {
    pub id: String,
    pub editor: ProfileAttrs,
    pub profile_query: Option<ProfileQuery>,
    pub theme: Option<String>,
    pub topics: Vec<String>,
    pub cards: Vec<Card>,
    pub state: GameState,
    #[serde(skip)]
    network: Option<NetworkHandle>,
}

impl GameInstance {
    pub fn new(id: impl Into<String>, editor: ProfileAttrs) -> Self {
        Self {
            id: id.into(),
            editor,
            profile_query: None,
            theme: None,
            topics: Vec::new(),
            cards: Vec::new(),
            state: GameState::Draft { step: 1 },
            network: None,
        }
    }

    pub fn is_published(&self) -> bool {
        self.state == GameState::Published
    }

    pub fn network(&self) -> Option<&ConceptNet> {
        self.network.as_ref().map(NetworkHandle::net)
    }

    pub fn cards_for<'a>(&'a self, topic: &'a str) -> impl Iterator<Item = (usize, &'a Card)> + 'a {
        self.cards.iter().enumerate().filter(move |(_, c)| c.topic == topic)
    }

    /// Publication invariants: topics present and distinct, a card for every
    /// topic, every card valid.
    pub fn check_publishable(&self) -> Result<(), GameError> {
        check_topics(&self.topics)?;
        for topic in &self.topics {
            if self.cards_for(topic).next().is_none() {
                return Err(GameError::EmptyTopic(topic.clone()));
            }
        }
        self.cards.iter().try_for_each(Card::validate)
    }
}

fn check_topics(topics: &[String]) -> Result<(), GameError> {
    if topics.is_empty() || topics.len() > MAX_TOPICS {
        return Err(GameError::InvalidTopics(format!("need 1 to {MAX_TOPICS} topics, got {}", topics.len())));
    }
    let mut seen = BTreeSet::new();
    for t in topics {
        if t.trim().is_empty() {
            return Err(GameError::InvalidTopics("empty topic".into()));
        }
        if !seen.insert(t.as_str()) {
            return Err(GameError::InvalidTopics(format!("duplicate topic `{t}`")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretWord {
    pub topic: String,
    pub secret_word: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardClues {
    /// Index into the game's cards, in the order step 4 created them.
    pub card: usize,
    pub clues: Vec<Clue>,
}

/// Payload of one wizard step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum WizardStep {
    Profile { query: Vec<Vec<String>> },
    Theme { theme: String },
    Topics { topics: Vec<String> },
    SecretWords { words: Vec<SecretWord> },
    Clues { cards: Vec<CardClues> },
    Review,
    Publish,
}

impl WizardStep {
    pub fn number(&self) -> u8 {
        match self {
            WizardStep::Profile { .. } => 1,
            WizardStep::Theme { .. } => 2,
            WizardStep::Topics { .. } => 3,
            WizardStep::SecretWords { .. } => 4,
            WizardStep::Clues { .. } => 5,
            WizardStep::Review => 6,
            WizardStep::Publish => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    /// Rendered relation, as shown to the editor.
    pub sentence: String,
    /// The sentence with the secret word and synonyms blanked, usable as a clue.
    pub clue: String,
    pub relation: Relation,
    pub weight: u32,
}

/// Clue candidates from the relations incident to the secret word or a
/// synonym. Ranked by `f + i`, then by the context score of the relation's
/// other end, then alphabetically. Returns nothing when no word is in `net`.
pub fn suggest_clues(secret_word: &str, synonyms: &[String], net: &ConceptNet, renderer: &Renderer) -> Vec<Suggestion> {
    let words: Vec<&str> = std::iter::once(secret_word).chain(synonyms.iter().map(String::as_str)).collect();
    let seeds: Vec<&str> = words.iter().copied().filter(|w| !net.resolve(w).is_empty()).collect();
    if seeds.is_empty() {
        return Vec::new();
    }
    let context: HashMap<String, f64> = get_context(net, &seeds, ContextParams::default())
        .map(|cs| cs.into_iter().map(|c| (c.concept, c.score)).collect())
        .unwrap_or_default();
    let mask = blank_words(&words);
    let mut seen = BTreeSet::new();
    let mut out: Vec<(f64, Suggestion)> = Vec::new();
    for word in &seeds {
        for entry in display_node(net, word, renderer) {
            if !seen.insert(entry.sentence.clone()) {
                continue;
            }
            let r = entry.relation;
            let other = if net.resolve(word).contains(&r.param1.as_str()) { &r.param2 } else { &r.param1 };
            let score = context.get(other.as_str()).copied().unwrap_or(0.0);
            out.push((
                score,
                Suggestion { clue: mask(&entry.sentence), sentence: entry.sentence, weight: r.f + r.i, relation: r },
            ));
        }
    }
    out.sort_by(|(sa, a), (sb, b)| {
        b.weight.cmp(&a.weight).then(sb.total_cmp(sa)).then_with(|| a.sentence.cmp(&b.sentence))
    });
    out.into_iter().map(|(_, s)| s).collect()
}

fn blank_words(words: &[&str]) -> impl Fn(&str) -> String {
    let mut sorted: Vec<&str> = words.iter().copied().filter(|w| !w.trim().is_empty()).collect();
    sorted.sort_by_key(|w| std::cmp::Reverse(w.len()));
    let alternation = sorted.iter().map(|w| regex::escape(w)).collect::<Vec<_>>().join("|");
    let re = RegexBuilder::new(&format!("({alternation})"))
        .case_insensitive(true)
        .build()
        .expect("escaped alternation compiles");
    move |s: &str| re.replace_all(s, "___").into_owned()
}

/// Statements `secret is also known as s` for each synonym, plus
/// `a is also known as b` for each unordered synonym pair, in that order.
pub fn synonym_statements(secret_word: &str, synonyms: &[String]) -> Result<Vec<String>, GameError> {
    if synonyms.is_empty() {
        return Err(GameError::NoSynonyms);
    }
    let mut seen = BTreeSet::new();
    for s in synonyms {
        if !seen.insert(s.to_lowercase()) || s.eq_ignore_ascii_case(secret_word) {
            return Err(GameError::DuplicateSynonym(s.clone()));
        }
    }
    let mut out: Vec<String> = synonyms.iter().map(|s| format!("{secret_word} is also known as {s}")).collect();
    for (k, a) in synonyms.iter().enumerate() {
        for b in &synonyms[k + 1..] {
            out.push(format!("{a} is also known as {b}"));
        }
    }
    Ok(out)
}

/// Uniform draw among the topics of a published game.
pub fn roll_dice<R: Rng + ?Sized>(game: &GameInstance, rng: &mut R) -> Result<String, GameError> {
    if !game.is_published() {
        return Err(GameError::NotPublished);
    }
    let k = rng.random_range(0..game.topics.len());
    Ok(game.topics[k].clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Correct,
    /// Not the expected answer, which the game never calls wrong.
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessRecord {
    pub guess: String,
    pub revealed: Vec<usize>,
    pub outcome: Outcome,
    pub statements: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaySession {
    pub id: String,
    pub game_id: String,
    pub player: ProfileAttrs,
    pub topic: Option<String>,
    pub card: Option<usize>,
    /// 1-based clue numbers in reveal order.
    pub revealed: Vec<usize>,
    pub guesses: Vec<GuessRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roll {
    pub topic: String,
    pub card: usize,
    pub clue_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuessResult {
    pub outcome: Outcome,
    pub records: Vec<u64>,
}

/// Lowercased lemma form used to compare guesses with answers.
pub fn normalize_answer(text: &str, morphology: &dyn MorphologyProvider) -> String {
    lemma_phrase(&normalize_phrase(&text.trim().to_lowercase(), morphology))
}

#[derive(Debug, Clone, Copy)]
pub struct GameConfig {
    /// Clues a player must reveal before a guess is accepted.
    pub min_reveals: usize,
    pub rng_seed: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self { min_reveals: 1, rng_seed: 0 }
    }
}

/// Game registry plus the collaborators the wizard and player loop need.
pub struct GameService {
    store: Arc<StatementStore>,
    networks: Arc<NetworkRepository>,
    morphology: Arc<dyn MorphologyProvider>,
    renderer: Renderer,
    config: GameConfig,
    games: RwLock<BTreeMap<String, GameInstance>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<PlaySession>>>>,
    rng: Mutex<ChaCha8Rng>,
    next_id: Mutex<u64>,
}

impl GameService {
    pub fn new(
        store: Arc<StatementStore>,
        networks: Arc<NetworkRepository>,
        morphology: Arc<dyn MorphologyProvider>,
        renderer: Renderer,
        config: GameConfig,
    ) -> Self {
        for t in game_templates() {
            store.add_template(t);
        }
        Self {
            store,
            networks,
            morphology,
            renderer,
            games: RwLock::new(BTreeMap::new()),
            sessions: Mutex::new(HashMap::new()),
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(config.rng_seed)),
            config,
            next_id: Mutex::new(1),
        }
    }

    pub fn store(&self) -> &StatementStore {
        &self.store
    }

    fn fresh_id(&self, prefix: &str) -> String {
        let mut n = self.next_id.lock().expect("id counter");
        let id = format!("{prefix}{n}");
        *n += 1;
        id
    }

    pub fn create_game(&self, editor: ProfileAttrs) -> GameInstance {
        let game = GameInstance::new(self.fresh_id("g"), editor);
        self.games.write().expect("games").insert(game.id.clone(), game.clone());
        game
    }

    pub fn game(&self, id: &str) -> Result<GameInstance, GameError> {
        self.games.read().expect("games").get(id).cloned().ok_or_else(|| GameError::UnknownGame(id.to_string()))
    }

    pub fn games(&self) -> Vec<GameInstance> {
        self.games.read().expect("games").values().cloned().collect()
    }

    /// Applies the next wizard step. A failed step leaves the game unchanged.
    pub fn wizard_advance(&self, game_id: &str, step: WizardStep) -> Result<GameInstance, GameError> {
        let mut games = self.games.write().expect("games");
        let current = games.get(game_id).ok_or_else(|| GameError::UnknownGame(game_id.to_string()))?;
        let expected = match current.state {
            GameState::Published => return Err(GameError::AlreadyPublished),
            GameState::Draft { step } => step,
        };
        if step.number() != expected {
            return Err(GameError::OutOfOrder { expected, got: step.number() });
        }
        let mut game = current.clone();
        match step {
            WizardStep::Profile { query } => {
                let q = ProfileQuery::parse(&query, &self.networks.schema().vocab)
                    .map_err(|e| GameError::Network(e.to_string()))?;
                let handle = self.networks.materialize(&q).map_err(|e| GameError::Network(e.to_string()))?;
                game.profile_query = Some(q);
                game.network = Some(handle);
            }
            WizardStep::Theme { theme } => {
                let theme = theme.trim().to_lowercase();
                if !THEMES.contains(&theme.as_str()) {
                    return Err(GameError::InvalidTheme(theme));
                }
                game.theme = Some(theme);
            }
            WizardStep::Topics { topics } => {
                check_topics(&topics)?;
                game.topics = topics;
            }
            WizardStep::SecretWords { words } => {
                let mut cards = Vec::new();
                for w in &words {
                    if !game.topics.contains(&w.topic) {
                        return Err(GameError::InvalidTopics(format!("`{}` is not a topic of this game", w.topic)));
                    }
                    if w.secret_word.trim().is_empty() {
                        return Err(GameError::InvalidCard("empty secret word".into()));
                    }
                    if !w.synonyms.is_empty() {
                        synonym_statements(&w.secret_word, &w.synonyms)?;
                    }
                    cards.push(Card {
                        topic: w.topic.clone(),
                        secret_word: w.secret_word.trim().to_string(),
                        synonyms: w.synonyms.clone(),
                        clues: Vec::new(),
                    });
                }
                for w in words.iter().filter(|w| !w.synonyms.is_empty()) {
                    self.record_synonyms(&w.secret_word, &w.synonyms, &game.editor)?;
                }
                game.cards = cards;
            }
            WizardStep::Clues { cards } => {
                for cc in &cards {
                    let card = game
                        .cards
                        .get_mut(cc.card)
                        .ok_or_else(|| GameError::InvalidCard(format!("no card at index {}", cc.card)))?;
                    card.clues = cc.clues.clone();
                    card.validate()?;
                }
                // edited and authored clues are contributions from the editor
                for cc in &cards {
                    for clue in cc.clues.iter().filter(|c| c.source != ClueSource::Suggested) {
                        self.store
                            .submit_text(CLUE_ACTIVITY, &clue.text, game.editor.clone())
                            .map_err(|e| GameError::Store(e.to_string()))?;
                    }
                }
            }
            WizardStep::Review => game.cards.iter().try_for_each(Card::validate)?,
            WizardStep::Publish => game.check_publishable()?,
        }
        game.state = if expected == 7 { GameState::Published } else { GameState::Draft { step: expected + 1 } };
        games.insert(game.id.clone(), game.clone());
        Ok(game)
    }

    /// Suggestions for a card of a game whose network step 1 materialized.
    pub fn suggest_clues(
        &self,
        game_id: &str,
        secret_word: &str,
        synonyms: &[String],
    ) -> Result<Vec<Suggestion>, GameError> {
        let game = self.game(game_id)?;
        Ok(match game.network() {
            Some(net) => suggest_clues(secret_word, synonyms, net, &self.renderer),
            None => Vec::new(),
        })
    }

    /// Stores the synonym statements under the editor's profile.
    pub fn record_synonyms(
        &self,
        secret_word: &str,
        synonyms: &[String],
        editor: &ProfileAttrs,
    ) -> Result<Vec<Statement>, GameError> {
        let template = self
            .store
            .template(SYNONYM_ACTIVITY)
            .ok_or_else(|| GameError::Store(format!("activity `{SYNONYM_ACTIVITY}` missing")))?;
        let mut stored = Vec::new();
        let mut pairs: Vec<(&str, &str)> = synonyms.iter().map(|s| (secret_word, s.as_str())).collect();
        for (k, a) in synonyms.iter().enumerate() {
            pairs.extend(synonyms[k + 1..].iter().map(|b| (a.as_str(), b.as_str())));
        }
        synonym_statements(secret_word, synonyms)?;
        for (a, b) in pairs {
            let rendered =
                RenderedTemplate { template: template.clone(), dynamic_filler: Some(a.to_string()), source: None };
            stored.push(
                self.store
                    .submit_statement(&rendered, b, editor.clone())
                    .map_err(|e| GameError::Store(e.to_string()))?,
            );
        }
        Ok(stored)
    }

    pub fn start_session(&self, game_id: &str, player: ProfileAttrs) -> Result<PlaySession, GameError> {
        if !self.game(game_id)?.is_published() {
            return Err(GameError::NotPublished);
        }
        let session = PlaySession {
            id: self.fresh_id("s"),
            game_id: game_id.to_string(),
            player,
            topic: None,
            card: None,
            revealed: Vec::new(),
            guesses: Vec::new(),
        };
        self.sessions.lock().expect("sessions").insert(session.id.clone(), Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    fn session_slot(&self, id: &str) -> Result<Arc<Mutex<PlaySession>>, GameError> {
        self.sessions
            .lock()
            .expect("sessions")
            .get(id)
            .cloned()
            .ok_or_else(|| GameError::UnknownSession(id.to_string()))
    }

    pub fn session(&self, id: &str) -> Result<PlaySession, GameError> {
        Ok(self.session_slot(id)?.lock().expect("session").clone())
    }

    pub fn roll_dice(&self, game_id: &str) -> Result<String, GameError> {
        let game = self.game(game_id)?;
        roll_dice(&game, &mut *self.rng.lock().expect("rng"))
    }

    /// Rolls a topic for the session and deals one of its cards.
    pub fn roll(&self, session_id: &str) -> Result<Roll, GameError> {
        let slot = self.session_slot(session_id)?;
        let mut session = slot.lock().expect("session");
        let game = self.game(&session.game_id)?;
        let (topic, card) = {
            let mut rng = self.rng.lock().expect("rng");
            let topic = roll_dice(&game, &mut *rng)?;
            let cards: Vec<usize> = game.cards_for(&topic).map(|(k, _)| k).collect();
            let card = cards[rng.random_range(0..cards.len())];
            (topic, card)
        };
        session.topic = Some(topic.clone());
        session.card = Some(card);
        session.revealed.clear();
        Ok(Roll { topic, card, clue_count: game.cards[card].clues.len() })
    }

    /// Reveals clue `index` (1-based) of the current card.
    pub fn reveal_clue(&self, session_id: &str, index: usize) -> Result<String, GameError> {
        let slot = self.session_slot(session_id)?;
        let mut session = slot.lock().expect("session");
        let card = self.current_card(&session)?;
        if index == 0 || index > card.clues.len() {
            return Err(GameError::ClueOutOfRange { index, len: card.clues.len() });
        }
        if session.revealed.contains(&index) {
            return Err(GameError::AlreadyRevealed(index));
        }
        session.revealed.push(index);
        Ok(card.clues[index - 1].text.clone())
    }

    fn current_card(&self, session: &PlaySession) -> Result<Card, GameError> {
        let game = self.game(&session.game_id)?;
        let k = session.card.ok_or_else(|| GameError::InvalidCard("roll the dice first".into()))?;
        Ok(game.cards[k].clone())
    }

    /// Compares the guess with the secret word and synonyms after
    /// normalization, and stores one `guess is associated with clue`
    /// statement per revealed clue, whatever the outcome.
    pub fn submit_guess(&self, session_id: &str, guess: &str) -> Result<GuessResult, GameError> {
        let guess = guess.trim();
        if guess.is_empty() {
            return Err(GameError::EmptyGuess);
        }
        let slot = self.session_slot(session_id)?;
        let mut session = slot.lock().expect("session");
        let card = self.current_card(&session)?;
        if session.revealed.len() < self.config.min_reveals {
            return Err(GameError::NeedsReveal(self.config.min_reveals));
        }
        let normalized = normalize_answer(guess, self.morphology.as_ref());
        let correct = std::iter::once(&card.secret_word)
            .chain(&card.synonyms)
            .any(|answer| normalize_answer(answer, self.morphology.as_ref()) == normalized);
        let outcome = if correct { Outcome::Correct } else { Outcome::Open };
        let template = self
            .store
            .template(PLAY_ACTIVITY)
            .ok_or_else(|| GameError::Store(format!("activity `{PLAY_ACTIVITY}` missing")))?;
        let mut records = Vec::new();
        for &k in &session.revealed {
            let rendered = RenderedTemplate {
                template: template.clone(),
                dynamic_filler: Some(card.clues[k - 1].text.clone()),
                source: None,
            };
            let s = self
                .store
                .submit_statement(&rendered, guess, session.player.clone())
                .map_err(|e| GameError::Store(e.to_string()))?;
            records.push(s.id);
        }
        let revealed = session.revealed.clone();
        session.guesses.push(GuessRecord { guess: guess.to_string(), revealed, outcome, statements: records.clone() });
        Ok(GuessResult { outcome, records })
    }
}
