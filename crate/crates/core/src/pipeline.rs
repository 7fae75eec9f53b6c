//! The generation phases as text-to-text steps, so each stage can be run,
//! stored and diffed on its own.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::parse_corpus;
use crate::error::{ExtractError, ParseError};
use crate::extraction::Extractor;
use crate::filter::build_conceptnet;
use crate::network::{ConceptNet, NetworkMetrics};
use crate::normalization::{normalize_relation, LexiconMorphology, MorphologyProvider, NormalizationStats};
use crate::profile::ProfileQuery;
use crate::relation::{RawRelation, Schema};
use crate::relaxation::{relax, HeuristicFlags, RelationSet, RelaxReport};
use crate::resources::Lang;

pub struct Pipeline {
    pub extractor: Extractor,
    pub morphology: Arc<dyn MorphologyProvider>,
    pub schema: Schema,
    pub flags: HeuristicFlags,
}

/// Everything one full run produces.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub extracted: String,
    pub normalized: String,
    pub relaxed: String,
    pub network: String,
    pub relaxed_set: RelationSet,
    pub net: ConceptNet,
    pub normalization: NormalizationStats,
    pub relaxation: RelaxReport,
}

impl Pipeline {
    pub fn new(
        extractor: Extractor,
        morphology: Arc<dyn MorphologyProvider>,
        schema: Schema,
        flags: HeuristicFlags,
    ) -> Self {
        Self { extractor, morphology, schema, flags }
    }

    /// Bundled rules, negation list and lexicon for `lang`.
    pub fn bundled(lang: Lang, flags: HeuristicFlags) -> Result<Self, ExtractError> {
        let schema = Schema::with_defaults();
        Ok(Self::new(
            Extractor::bundled(lang, schema.types.clone())?,
            Arc::new(LexiconMorphology::bundled(lang)),
            schema,
            flags,
        ))
    }

    /// Export lines to extracted relation lines, ordered by statement id.
    pub fn extract_text(&self, corpus: &str) -> Result<String, ParseError> {
        let records = parse_corpus(corpus, &self.schema.vocab)?;
        Ok(lines(self.extractor.extract_corpus(&records).iter().map(RawRelation::to_line)))
    }

    pub fn normalize_text(&self, extracted: &str) -> Result<(String, NormalizationStats), ParseError> {
        let mut stats = NormalizationStats::default();
        let out = self
            .parse_raw(extracted)?
            .iter()
            .map(|r| normalize_relation(r, self.morphology.as_ref(), &mut stats).to_line())
            .collect::<Vec<_>>();
        Ok((lines(out), stats))
    }

    pub fn relax_text(&self, normalized: &str) -> Result<(String, RelaxReport), ParseError> {
        let (set, report) = relax(self.parse_raw(normalized)?, &self.flags);
        Ok((set.to_lines(), report))
    }

    pub fn filter_text(&self, relaxed: &str, q: &ProfileQuery) -> Result<String, ParseError> {
        let set = RelationSet::parse_lines(relaxed, &self.schema)?;
        Ok(build_conceptnet(q, &set, &self.flags).to_text())
    }

    fn parse_raw(&self, text: &str) -> Result<Vec<RawRelation>, ParseError> {
        text.lines().filter(|l| !l.trim().is_empty()).map(|l| RawRelation::parse(l, &self.schema)).collect()
    }

    /// All phases after export. With `normalize` off the extracted lines go
    /// straight to relaxation.
    pub fn run(&self, corpus: &str, q: &ProfileQuery, normalize: bool) -> Result<PipelineRun, ParseError> {
        let extracted = self.extract_text(corpus)?;
        let (normalized, normalization) = if normalize {
            self.normalize_text(&extracted)?
        } else {
            (extracted.clone(), NormalizationStats::default())
        };
        let (relaxed, relaxation) = self.relax_text(&normalized)?;
        let relaxed_set = RelationSet::parse_lines(&relaxed, &self.schema)?;
        let net = build_conceptnet(q, &relaxed_set, &self.flags);
        Ok(PipelineRun {
            extracted,
            normalized,
            network: net.to_text(),
            relaxed,
            relaxed_set,
            net,
            normalization,
            relaxation,
        })
    }

    /// Network metrics with normalization off and on, all else equal.
    pub fn metrics(&self, corpus: &str, q: &ProfileQuery) -> Result<MetricsReport, ParseError> {
        let before = self.run(corpus, q, false)?.net.metrics();
        let after = self.run(corpus, q, true)?;
        Ok(MetricsReport::new(before, after.net.metrics(), after.normalization))
    }
}

fn lines<I: IntoIterator<Item = String>>(items: I) -> String {
    items.into_iter().map(|l| l + "\n").collect()
}

/// Before/after comparison in the shape of a normalization impact table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub before: NetworkMetrics,
    pub after: NetworkMetrics,
    pub nodes_change_pct: f64,
    pub relations_change_pct: f64,
    pub density_change_pct: f64,
    pub normalization: NormalizationStats,
}

impl MetricsReport {
    pub fn new(before: NetworkMetrics, after: NetworkMetrics, normalization: NormalizationStats) -> Self {
        Self {
            nodes_change_pct: pct(before.nodes as f64, after.nodes as f64),
            relations_change_pct: pct(before.relations as f64, after.relations as f64),
            density_change_pct: pct(before.density, after.density),
            before,
            after,
            normalization,
        }
    }

    pub fn to_table(&self) -> String {
        let row = |name: &str, b: String, a: String, p: f64| format!("{name:<10}{b:>12}{a:>12}{p:>+11.2} %\n");
        let mut out = format!("{:<10}{:>12}{:>12}{:>13}\n", "", "before", "after", "change");
        out += &row("nodes", self.before.nodes.to_string(), self.after.nodes.to_string(), self.nodes_change_pct);
        out += &row(
            "relations",
            self.before.relations.to_string(),
            self.after.relations.to_string(),
            self.relations_change_pct,
        );
        out += &row(
            "density",
            format!("{:.4}", self.before.density),
            format!("{:.4}", self.after.density),
            self.density_change_pct,
        );
        out
    }
}

fn pct(before: f64, after: f64) -> f64 {
    if before == 0.0 {
        0.0
    } else {
        (after - before) / before * 100.0
    }
}
