//! Contributor profiles and the five-list profile queries used to scope networks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ProfileError;

/// Contributor gender as recorded at registration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gender {
    M,
    F,
}

impl Gender {
    pub const ALL: [Gender; 2] = [Gender::M, Gender::F];

    pub fn code(self) -> &'static str {
        match self {
            Gender::M => "M",
            Gender::F => "F",
        }
    }
}

impl FromStr for Gender {
    type Err = ProfileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "M" => Ok(Gender::M),
            "F" => Ok(Gender::F),
            other => Err(ProfileError::UnknownValue { field: "gender", value: other.to_string() }),
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// The six age bands contributors choose from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeGroup {
    #[serde(rename = "lt_12")]
    Under12,
    #[serde(rename = "13_17")]
    From13To17,
    #[serde(rename = "18_29")]
    From18To29,
    #[serde(rename = "30_45")]
    From30To45,
    #[serde(rename = "46_65")]
    From46To65,
    #[serde(rename = "gt_65")]
    Over65,
}

impl AgeGroup {
    pub const ALL: [AgeGroup; 6] = [
        AgeGroup::Under12,
        AgeGroup::From13To17,
        AgeGroup::From18To29,
        AgeGroup::From30To45,
        AgeGroup::From46To65,
        AgeGroup::Over65,
    ];

    pub fn code(self) -> &'static str {
        match self {
            AgeGroup::Under12 => "lt_12",
            AgeGroup::From13To17 => "13_17",
            AgeGroup::From18To29 => "18_29",
            AgeGroup::From30To45 => "30_45",
            AgeGroup::From46To65 => "46_65",
            AgeGroup::Over65 => "gt_65",
        }
    }
}

impl FromStr for AgeGroup {
    type Err = ProfileError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgeGroup::ALL
            .into_iter()
            .find(|a| a.code() == s)
            .ok_or_else(|| ProfileError::UnknownValue { field: "age_group", value: s.to_string() })
    }
}

impl fmt::Display for AgeGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Closed vocabulary of education codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileVocabulary {
    educations: Vec<String>,
}

impl ProfileVocabulary {
    pub fn new<I, S>(educations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { educations: educations.into_iter().map(Into::into).collect() }
    }

    pub fn educations(&self) -> &[String] {
        &self.educations
    }

    pub fn check_education(&self, code: &str) -> Result<(), ProfileError> {
        if self.educations.iter().any(|e| e == code) {
            Ok(())
        } else {
            Err(ProfileError::UnknownValue { field: "education", value: code.to_string() })
        }
    }
}

impl Default for ProfileVocabulary {
    fn default() -> Self {
        Self::new([
            "1_incompleto",
            "1_completo",
            "2_incompleto",
            "2_completo",
            "superior_incompleto",
            "superior_completo",
            "especializacao",
            "mestrado",
            "doutorado",
        ])
    }
}

/// Profile of the person who contributed a statement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProfileAttrs {
    pub gender: Gender,
    pub age_group: AgeGroup,
    pub education: String,
    pub city: String,
    pub state: String,
}

impl ProfileAttrs {
    /// Builds a profile from its five slot codes, validating each one.
    pub fn from_codes(
        gender: &str,
        age_group: &str,
        education: &str,
        city: &str,
        state: &str,
        vocab: &ProfileVocabulary,
    ) -> Result<Self, ProfileError> {
        vocab.check_education(education)?;
        for (field, value) in [("city", city), ("state", state)] {
            check_free_text(field, value)?;
        }
        Ok(Self {
            gender: gender.parse()?,
            age_group: age_group.parse()?,
            education: education.to_string(),
            city: city.to_string(),
            state: state.to_string(),
        })
    }

    /// The five slot values in export order.
    pub fn codes(&self) -> [&str; 5] {
        [self.gender.code(), self.age_group.code(), &self.education, &self.city, &self.state]
    }
}

fn check_free_text(field: &'static str, value: &str) -> Result<(), ProfileError> {
    if value.trim().is_empty() || value.contains("$$") || value.contains(['"', '\n']) {
        return Err(ProfileError::InvalidText { field, value: value.to_string() });
    }
    Ok(())
}

/// Five ordered lists of accepted values; an empty list accepts everything.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ProfileQuery {
    pub genders: Vec<Gender>,
    pub age_groups: Vec<AgeGroup>,
    pub educations: Vec<String>,
    pub cities: Vec<String>,
    pub states: Vec<String>,
}

impl ProfileQuery {
    /// Match-all query.
    pub fn all() -> Self {
        Self::default()
    }

    /// Validates and canonicalizes (sorted, deduplicated) five raw value lists.
    pub fn parse<S: AsRef<str>>(lists: &[Vec<S>], vocab: &ProfileVocabulary) -> Result<Self, ProfileError> {
        let mut q = ProfileQuery::default();
        // values are checked before arity so a bad value is reported as such
        for (pos, list) in lists.iter().enumerate().take(5) {
            for v in list {
                let v = v.as_ref();
                match pos {
                    0 => q.genders.push(v.parse()?),
                    1 => q.age_groups.push(v.parse()?),
                    2 => {
                        vocab.check_education(v)?;
                        q.educations.push(v.to_string());
                    }
                    3 => {
                        check_free_text("city", v)?;
                        q.cities.push(v.to_string());
                    }
                    _ => {
                        check_free_text("state", v)?;
                        q.states.push(v.to_string());
                    }
                }
            }
        }
        if lists.len() != 5 {
            return Err(ProfileError::Arity(lists.len()));
        }
        Ok(q.canonical())
    }

    /// Parses the bracketed textual form, with or without quotes:
    /// `[[], [13_17, 18_29], [2_completo], [], [SP, MG]]`.
    pub fn parse_spec(spec: &str, vocab: &ProfileVocabulary) -> Result<Self, ProfileError> {
        let lists = parse_nested_lists(spec)?;
        Self::parse(&lists, vocab)
    }

    fn canonical(mut self) -> Self {
        self.genders.sort();
        self.genders.dedup();
        self.age_groups.sort();
        self.age_groups.dedup();
        for list in [&mut self.educations, &mut self.cities, &mut self.states] {
            list.sort();
            list.dedup();
        }
        self
    }

    pub fn matches(&self, p: &ProfileAttrs) -> bool {
        fn accepts<T: PartialEq>(list: &[T], v: &T) -> bool {
            list.is_empty() || list.contains(v)
        }
        accepts(&self.genders, &p.gender)
            && accepts(&self.age_groups, &p.age_group)
            && accepts(&self.educations, &p.education)
            && accepts(&self.cities, &p.city)
            && accepts(&self.states, &p.state)
    }

    /// The five lists as strings, in canonical order.
    pub fn to_lists(&self) -> [Vec<String>; 5] {
        [
            self.genders.iter().map(|g| g.code().to_string()).collect(),
            self.age_groups.iter().map(|a| a.code().to_string()).collect(),
            self.educations.clone(),
            self.cities.clone(),
            self.states.clone(),
        ]
    }

    /// Stable serialization used as the cache key.
    pub fn canonical_key(&self) -> String {
        serde_json::to_string(&self.to_lists()).expect("string lists always serialize")
    }
}

impl fmt::Display for ProfileQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_key())
    }
}

fn parse_nested_lists(spec: &str) -> Result<Vec<Vec<String>>, ProfileError> {
    let bad = || ProfileError::Syntax(spec.to_string());
    let s = spec.trim();
    let inner = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
    let mut lists = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let body_start = rest.strip_prefix('[').ok_or_else(bad)?;
        let close = body_start.find(']').ok_or_else(bad)?;
        let body = &body_start[..close];
        let values =
            body.split(',').map(|v| v.trim().trim_matches('"').trim().to_string()).filter(|v| !v.is_empty()).collect();
        lists.push(values);
        rest = body_start[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        } else if !rest.is_empty() {
            return Err(bad());
        }
    }
    Ok(lists)
}
