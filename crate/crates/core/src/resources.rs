//! Bundled configuration and fixture data.
//!
//! Everything here is plain text in the formats the loaders accept, so any of
//! it can be replaced with a file on disk.

use std::fmt;
use std::str::FromStr;

pub const RELATION_TYPES: &str = include_str!("../data/relation_types.txt");

pub const RULES_PT: &str = include_str!("../data/rules_pt.tsv");
pub const RULES_EN: &str = include_str!("../data/rules_en.tsv");

pub const NEGATION_PT: &str = include_str!("../data/negation_pt.txt");
pub const NEGATION_EN: &str = include_str!("../data/negation_en.txt");

pub const LEXICON_PT: &str = include_str!("../data/lexicon_pt.tsv");
pub const LEXICON_EN: &str = include_str!("../data/lexicon_en.tsv");
pub const CLITICS_PT: &str = include_str!("../data/clitics_pt.tsv");

pub const RENDER_PT: &str = include_str!("../data/render_pt.tsv");
pub const RENDER_EN: &str = include_str!("../data/render_en.tsv");

pub const TEMPLATES_PT: &str = include_str!("../data/templates_pt.tsv");
pub const TEMPLATES_EN: &str = include_str!("../data/templates_en.tsv");

/// Language of a bundled resource set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lang {
    #[default]
    Pt,
    En,
}

impl Lang {
    pub fn rules(self) -> &'static str {
        match self {
            Lang::Pt => RULES_PT,
            Lang::En => RULES_EN,
        }
    }

    pub fn negation(self) -> &'static str {
        match self {
            Lang::Pt => NEGATION_PT,
            Lang::En => NEGATION_EN,
        }
    }

    pub fn lexicon(self) -> &'static str {
        match self {
            Lang::Pt => LEXICON_PT,
            Lang::En => LEXICON_EN,
        }
    }

    pub fn clitics(self) -> &'static str {
        match self {
            Lang::Pt => CLITICS_PT,
            Lang::En => "",
        }
    }

    pub fn render(self) -> &'static str {
        match self {
            Lang::Pt => RENDER_PT,
            Lang::En => RENDER_EN,
        }
    }

    pub fn templates(self) -> &'static str {
        match self {
            Lang::Pt => TEMPLATES_PT,
            Lang::En => TEMPLATES_EN,
        }
    }
}

impl FromStr for Lang {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pt" => Ok(Lang::Pt),
            "en" => Ok(Lang::En),
            other => Err(format!("unknown language `{other}` (expected pt or en)")),
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lang::Pt => "pt",
            Lang::En => "en",
        })
    }
}

/// Iterates the non-blank, non-comment lines of a data file with 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}
