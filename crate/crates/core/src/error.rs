use std::io;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("unknown {field} value `{value}`")]
    UnknownValue { field: &'static str, value: String },
    #[error("invalid {field} text `{value}`")]
    InvalidText { field: &'static str, value: String },
    #[error("profile query needs 5 lists, got {0}")]
    Arity(usize),
    #[error("malformed profile query `{0}`")]
    Syntax(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("relation type `{0}` registered twice")]
    Duplicate(String),
    #[error("negative type `{0}` names no affirmative counterpart")]
    MissingCounterpart(String),
    #[error("negative type `{negative}` names `{counterpart}`, which is not a registered affirmative type")]
    UnknownCounterpart { negative: String, counterpart: String },
    #[error("`{0}` is a k-line type and cannot have a negative form")]
    NegatedKLine(String),
    #[error("bad relation type definition on line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("malformed relation line: {0}")]
    Malformed(String),
    #[error("unknown relation type `{0}`")]
    UnknownType(String),
    #[error("bad counters `{0}`")]
    BadCounters(String),
    #[error("bad id list `{0}`")]
    BadIds(String),
    #[error("export line needs 7 `$$`-separated slots, got {0}")]
    SlotCount(usize),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("invalid relation: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("filler is empty")]
    EmptyFiller,
    #[error("unknown activity `{0}`")]
    UnknownActivity(String),
    #[error("statement text may not contain the `$$` delimiter")]
    ReservedDelimiter,
    #[error("no statement with id {0}")]
    NotFound(u64),
    #[error("statement {0} was already reviewed")]
    NotPending(u64),
    #[error("spelling evidence refers to statement {evidence}, not {statement}")]
    EvidenceMismatch { statement: u64, evidence: u64 },
    #[error("template for activity `{activity}` is malformed: {reason}")]
    BadTemplate { activity: String, reason: String },
    #[error("activity `{0}` has no template and no seed words")]
    NothingToRender(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error(transparent)]
    Line(#[from] ParseError),
    #[error("rule {index}: {reason}")]
    BadRule { index: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("depth must be at least 1")]
    BadDepth,
    #[error("decay must be a finite non-negative number, got {0}")]
    BadDecay(f64),
    #[error("rendering template line {line}: {reason}")]
    RenderTemplate { line: usize, reason: String },
    #[error("analogy needs two non-empty networks")]
    EmptyNetwork,
}

#[derive(Debug, Error)]
pub enum RepositoryError {
    #[error("storage failure at {path}: {source}")]
    Storage { path: String, source: io::Error },
    #[error("persisted network {path} is corrupt: {source}")]
    Corrupt { path: String, source: ParseError },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("game `{0}` not found")]
    UnknownGame(String),
    #[error("session `{0}` not found")]
    UnknownSession(String),
    #[error("expected wizard step {expected}, got step {got}")]
    OutOfOrder { expected: u8, got: u8 },
    #[error("game is already published")]
    AlreadyPublished,
    #[error("unknown theme `{0}`")]
    InvalidTheme(String),
    #[error("invalid topics: {0}")]
    InvalidTopics(String),
    #[error("invalid card: {0}")]
    InvalidCard(String),
    #[error("topic `{0}` has no card")]
    EmptyTopic(String),
    #[error("duplicate synonym `{0}`")]
    DuplicateSynonym(String),
    #[error("no synonyms given")]
    NoSynonyms,
    #[error("game is not published")]
    NotPublished,
    #[error("clue {index} is out of range 1..={len}")]
    ClueOutOfRange { index: usize, len: usize },
    #[error("clue {0} was already revealed")]
    AlreadyRevealed(usize),
    #[error("reveal at least {0} clue(s) before guessing")]
    NeedsReveal(usize),
    #[error("guess is empty")]
    EmptyGuess,
    #[error("store: {0}")]
    Store(String),
    #[error("network: {0}")]
    Network(String),
}
