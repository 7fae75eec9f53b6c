//! Templates, contributed statements, the feedback process and review.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, RwLock};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ExportRecord, DELIMITER};
use crate::error::StoreError;
use crate::normalization::{tokenize, MorphologyProvider};
use crate::profile::{ProfileAttrs, ProfileVocabulary};
use crate::resources::data_lines;

pub const BLANK: &str = "___";
pub const DYN_SLOT: &str = "{dyn}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub activity: String,
    pub text: String,
    pub relation_hint: String,
    pub domain: Option<String>,
}

impl Template {
    pub fn new(activity: &str, text: &str, relation_hint: &str, domain: Option<&str>) -> Result<Self, StoreError> {
        let bad = |reason: String| StoreError::BadTemplate { activity: activity.to_string(), reason };
        let blanks = text.matches(BLANK).count();
        if blanks != 1 {
            return Err(bad(format!("needs exactly one `{BLANK}`, found {blanks}")));
        }
        let slots = text.matches(DYN_SLOT).count();
        if slots > 1 {
            return Err(bad(format!("at most one `{DYN_SLOT}` allowed, found {slots}")));
        }
        if activity.is_empty() {
            return Err(bad("empty activity name".into()));
        }
        Ok(Self {
            activity: activity.to_string(),
            text: text.to_string(),
            relation_hint: relation_hint.to_string(),
            domain: domain.map(str::to_string),
        })
    }

    pub fn has_dynamic_slot(&self) -> bool {
        self.text.contains(DYN_SLOT)
    }
}

/// Reads `activity<TAB>text<TAB>relation_hint[<TAB>domain]` records.
pub fn parse_templates(text: &str) -> Result<Vec<Template>, StoreError> {
    data_lines(text)
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                [a, t, h] => Template::new(a, t, h, None),
                [a, t, h, d] => Template::new(a, t, h, Some(d)),
                _ => Err(StoreError::BadTemplate {
                    activity: format!("line {n}"),
                    reason: "expected 3 or 4 tab-separated fields".into(),
                }),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewStatus {
    Pending,
    ApprovedForFeedback,
    RejectedMisspelled,
}

impl fmt::Display for ReviewStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReviewStatus::Pending => "pending",
            ReviewStatus::ApprovedForFeedback => "approved_for_feedback",
            ReviewStatus::RejectedMisspelled => "rejected_misspelled",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub id: u64,
    pub text: String,
    pub profile: ProfileAttrs,
    pub activity: String,
    pub review: ReviewStatus,
    /// What the contributor typed into the blank; feeds later templates once approved.
    pub filler: Option<String>,
    pub spelling_failure: Option<SpellingFailure>,
}

impl Statement {
    pub fn export_line(&self) -> String {
        ExportRecord { text: self.text.clone(), profile: self.profile.clone(), id: self.id }.to_line()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FillerSource {
    Statement(u64),
    Seed,
}

/// A template whose dynamic slot has been filled by the feedback process.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedTemplate {
    pub template: Template,
    pub dynamic_filler: Option<String>,
    pub source: Option<FillerSource>,
}

impl RenderedTemplate {
    /// Text shown to the contributor, blank still open.
    pub fn text(&self) -> String {
        match &self.dynamic_filler {
            Some(f) => self.template.text.replace(DYN_SLOT, f),
            None => self.template.text.clone(),
        }
    }
}

/// Evidence that a statement failed spelling validation. Only
/// [`SpellChecker`] can produce one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpellingFailure {
    statement: u64,
    unknown_tokens: Vec<String>,
}

impl SpellingFailure {
    pub fn statement(&self) -> u64 {
        self.statement
    }

    pub fn unknown_tokens(&self) -> &[String] {
        &self.unknown_tokens
    }
}

/// Lexicon-membership spelling check. Capitalized words and numbers pass.
pub struct SpellChecker<'a> {
    morphology: &'a dyn MorphologyProvider,
}

impl<'a> SpellChecker<'a> {
    pub fn new(morphology: &'a dyn MorphologyProvider) -> Self {
        Self { morphology }
    }

    pub fn check(&self, statement: &Statement) -> Result<(), SpellingFailure> {
        let unknown_tokens: Vec<String> = tokenize(&statement.text)
            .into_iter()
            .filter(|t| {
                let first = t.chars().next().unwrap_or(' ');
                !(first.is_uppercase() || t.chars().all(|c| c.is_ascii_digit()) || self.morphology.knows(t))
            })
            .map(str::to_string)
            .collect();
        if unknown_tokens.is_empty() {
            Ok(())
        } else {
            Err(SpellingFailure { statement: statement.id, unknown_tokens })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReviewDecision {
    Approve,
    RejectMisspelled(SpellingFailure),
}

#[derive(Debug, Default)]
struct Inner {
    templates: BTreeMap<String, Template>,
    statements: BTreeMap<u64, Statement>,
    next_id: u64,
    seeds: Vec<String>,
    usage: HashMap<String, u64>,
}

/// Statement store. Writes take the lock exclusively; reads and exports
/// share it and see a consistent snapshot.
#[derive(Debug)]
pub struct StatementStore {
    inner: RwLock<Inner>,
    rng: Mutex<ChaCha8Rng>,
}

impl StatementStore {
    pub fn new(templates: Vec<Template>, seeds: Vec<String>, rng_seed: u64) -> Self {
        let inner = Inner {
            templates: templates.into_iter().map(|t| (t.activity.clone(), t)).collect(),
            next_id: 1,
            seeds,
            ..Inner::default()
        };
        Self { inner: RwLock::new(inner), rng: Mutex::new(ChaCha8Rng::seed_from_u64(rng_seed)) }
    }

    pub fn add_template(&self, template: Template) {
        let mut inner = self.inner.write().expect("store lock");
        inner.templates.insert(template.activity.clone(), template);
    }

    pub fn template(&self, activity: &str) -> Option<Template> {
        self.inner.read().expect("store lock").templates.get(activity).cloned()
    }

    pub fn activities(&self) -> Vec<String> {
        self.inner.read().expect("store lock").templates.keys().cloned().collect()
    }

    /// Completes a rendered template with the contributor's filler.
    pub fn submit_statement(
        &self,
        rendered: &RenderedTemplate,
        filler: &str,
        profile: ProfileAttrs,
    ) -> Result<Statement, StoreError> {
        let filler = filler.trim();
        if filler.is_empty() {
            return Err(StoreError::EmptyFiller);
        }
        let text = rendered.text().replacen(BLANK, filler, 1);
        self.insert(&rendered.template.activity, text, Some(filler.to_string()), profile)
    }

    /// Stores a complete sentence under an activity, as the game does.
    pub fn submit_text(&self, activity: &str, text: &str, profile: ProfileAttrs) -> Result<Statement, StoreError> {
        if text.trim().is_empty() {
            return Err(StoreError::EmptyFiller);
        }
        self.insert(activity, text.trim().to_string(), None, profile)
    }

    fn insert(
        &self,
        activity: &str,
        text: String,
        filler: Option<String>,
        profile: ProfileAttrs,
    ) -> Result<Statement, StoreError> {
        if text.contains(DELIMITER) {
            return Err(StoreError::ReservedDelimiter);
        }
        if text.contains(['\n', '\r']) {
            return Err(StoreError::BadTemplate {
                activity: activity.to_string(),
                reason: "statement spans several lines".into(),
            });
        }
        let mut inner = self.inner.write().expect("store lock");
        if !inner.templates.contains_key(activity) {
            return Err(StoreError::UnknownActivity(activity.to_string()));
        }
        let statement = Statement {
            id: inner.next_id,
            text,
            profile,
            activity: activity.to_string(),
            review: ReviewStatus::Pending,
            filler,
            spelling_failure: None,
        };
        inner.next_id += 1;
        inner.statements.insert(statement.id, statement.clone());
        Ok(statement)
    }

    /// Fills the template's dynamic slot from an approved contribution,
    /// favouring fillers that have been shown less often; seed words stand in
    /// when no approved filler exists.
    pub fn next_template(&self, activity: &str) -> Result<RenderedTemplate, StoreError> {
        let mut inner = self.inner.write().expect("store lock");
        let template =
            inner.templates.get(activity).cloned().ok_or_else(|| StoreError::UnknownActivity(activity.to_string()))?;
        if !template.has_dynamic_slot() {
            return Ok(RenderedTemplate { template, dynamic_filler: None, source: None });
        }
        let mut pool: BTreeMap<String, u64> = BTreeMap::new();
        for s in inner.statements.values() {
            if s.review == ReviewStatus::ApprovedForFeedback {
                if let Some(f) = &s.filler {
                    pool.entry(f.clone()).or_insert(s.id);
                }
            }
        }
        let candidates: Vec<(String, FillerSource)> = if pool.is_empty() {
            inner.seeds.iter().map(|s| (s.clone(), FillerSource::Seed)).collect()
        } else {
            pool.into_iter().map(|(f, id)| (f, FillerSource::Statement(id))).collect()
        };
        if candidates.is_empty() {
            return Err(StoreError::NothingToRender(activity.to_string()));
        }
        let weights: Vec<f64> =
            candidates.iter().map(|(f, _)| 1.0 / (1.0 + *inner.usage.get(f).unwrap_or(&0) as f64)).collect();
        let total: f64 = weights.iter().sum();
        let mut pick = self.rng.lock().expect("rng lock").random::<f64>() * total;
        let mut chosen = candidates.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            if pick < *w {
                chosen = k;
                break;
            }
            pick -= w;
        }
        let (filler, source) = candidates[chosen].clone();
        *inner.usage.entry(filler.clone()).or_default() += 1;
        Ok(RenderedTemplate { template, dynamic_filler: Some(filler), source: Some(source) })
    }

    /// Approves, or rejects with spelling evidence for this very statement.
    pub fn review_statement(&self, id: u64, decision: ReviewDecision) -> Result<Statement, StoreError> {
        let mut inner = self.inner.write().expect("store lock");
        let s = inner.statements.get_mut(&id).ok_or(StoreError::NotFound(id))?;
        if s.review != ReviewStatus::Pending {
            return Err(StoreError::NotPending(id));
        }
        match decision {
            ReviewDecision::Approve => s.review = ReviewStatus::ApprovedForFeedback,
            ReviewDecision::RejectMisspelled(evidence) => {
                if evidence.statement != id {
                    return Err(StoreError::EvidenceMismatch { statement: id, evidence: evidence.statement });
                }
                s.review = ReviewStatus::RejectedMisspelled;
                s.spelling_failure = Some(evidence);
            }
        }
        Ok(s.clone())
    }

    pub fn get(&self, id: u64) -> Option<Statement> {
        self.inner.read().expect("store lock").statements.get(&id).cloned()
    }

    pub fn statements(&self) -> Vec<Statement> {
        self.inner.read().expect("store lock").statements.values().cloned().collect()
    }

    pub fn statements_in(&self, activity: &str) -> Vec<Statement> {
        self.inner.read().expect("store lock").statements.values().filter(|s| s.activity == activity).cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("store lock").statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One seven-slot line per statement not rejected, by ascending id.
    pub fn export_corpus(&self) -> Vec<String> {
        self.inner
            .read()
            .expect("store lock")
            .statements
            .values()
            .filter(|s| s.review != ReviewStatus::RejectedMisspelled)
            .map(Statement::export_line)
            .collect()
    }

    /// Loads exported lines as pending statements under `activity`, keeping
    /// their ids. Later submissions continue after the highest id.
    pub fn import(&self, lines: &[String], activity: &str, vocab: &ProfileVocabulary) -> Result<usize, StoreError> {
        let records = lines.iter().map(|l| ExportRecord::parse(l, vocab)).collect::<Result<Vec<_>, _>>()?;
        let mut inner = self.inner.write().expect("store lock");
        if !inner.templates.contains_key(activity) {
            return Err(StoreError::UnknownActivity(activity.to_string()));
        }
        for rec in &records {
            inner.next_id = inner.next_id.max(rec.id + 1);
            inner.statements.insert(
                rec.id,
                Statement {
                    id: rec.id,
                    text: rec.text.clone(),
                    profile: rec.profile.clone(),
                    activity: activity.to_string(),
                    review: ReviewStatus::Pending,
                    filler: None,
                    spelling_failure: None,
                },
            );
        }
        Ok(records.len())
    }

    /// Every statement, rejected ones included, as one JSON object per line.
    pub fn to_json_lines(&self) -> Result<String, StoreError> {
        let inner = self.inner.read().expect("store lock");
        let mut out = String::new();
        for s in inner.statements.values() {
            out += &serde_json::to_string(s)?;
            out.push('\n');
        }
        Ok(out)
    }

    /// Loads statements written by [`Self::to_json_lines`], review state
    /// included. Filler usage counts start from zero.
    pub fn load_json_lines(&self, text: &str) -> Result<usize, StoreError> {
        let statements = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str::<Statement>)
            .collect::<Result<Vec<_>, _>>()?;
        let mut inner = self.inner.write().expect("store lock");
        for s in &statements {
            inner.next_id = inner.next_id.max(s.id + 1);
            inner.statements.insert(s.id, s.clone());
        }
        Ok(statements.len())
    }
}
