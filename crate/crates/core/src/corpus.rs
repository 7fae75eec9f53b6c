//! The seven-slot export format: `text$$g$$a$$e$$city$$state$$id`.

use std::fmt;

use crate::error::ParseError;
use crate::profile::{ProfileAttrs, ProfileVocabulary};

pub const DELIMITER: &str = "$$";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportRecord {
    pub text: String,
    pub profile: ProfileAttrs,
    pub id: u64,
}

impl ExportRecord {
    pub fn parse(line: &str, vocab: &ProfileVocabulary) -> Result<Self, ParseError> {
        let slots: Vec<&str> = line.split(DELIMITER).collect();
        let [text, g, a, e, c, s, id] = slots.as_slice() else {
            return Err(ParseError::SlotCount(slots.len()));
        };
        if text.trim().is_empty() {
            return Err(ParseError::Invalid("empty statement text".into()));
        }
        Ok(Self {
            text: text.to_string(),
            profile: ProfileAttrs::from_codes(g, a, e, c, s, vocab)?,
            id: id.trim().parse().map_err(|_| ParseError::BadIds(id.to_string()))?,
        })
    }

    pub fn to_line(&self) -> String {
        let [g, a, e, c, s] = self.profile.codes();
        [self.text.as_str(), g, a, e, c, s, &self.id.to_string()].join(DELIMITER)
    }
}

impl fmt::Display for ExportRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// Parses every non-blank line of an export file.
pub fn parse_corpus(text: &str, vocab: &ProfileVocabulary) -> Result<Vec<ExportRecord>, ParseError> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .map(|l| ExportRecord::parse(l, vocab))
        .collect()
}
