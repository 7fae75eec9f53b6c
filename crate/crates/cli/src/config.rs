//! Resource selection shared by every subcommand: flags first, then the
//! optional TOML config file, then the bundled defaults for the language.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use commonsense_core::extraction::{parse_rules, Extractor, NegationLexicon};
use commonsense_core::inference::Renderer;
use commonsense_core::normalization::LexiconMorphology;
use commonsense_core::pipeline::Pipeline;
use commonsense_core::profile::{ProfileQuery, ProfileVocabulary};
use commonsense_core::relation::{Schema, TypeRegistry};
use commonsense_core::relaxation::HeuristicFlags;
use commonsense_core::resources::{Lang, RELATION_TYPES};
use commonsense_core::store::{parse_templates, Template};
use serde::Deserialize;

use crate::CliError;

/// Keys accepted in the config file, named like the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lang: Option<String>,
    pub rules: Option<PathBuf>,
    pub negation: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub clitics: Option<PathBuf>,
    pub types: Option<PathBuf>,
    pub render: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub heuristics: Option<String>,
    pub profile: Option<String>,
    pub corpus: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub addr: Option<String>,
    pub ports: Option<String>,
    pub server: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct ResourceArgs {
    /// TOML file with any of the flags below as keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Language of the bundled resources: pt or en.
    #[arg(long, global = true)]
    pub lang: Option<String>,
    /// Extraction rules, `pattern<TAB>type<TAB>anchor` per line.
    #[arg(long, global = true, value_name = "FILE")]
    pub rules: Option<PathBuf>,
    /// Negative adverbs and phrases, one per line.
    #[arg(long, global = true, value_name = "FILE")]
    pub negation: Option<PathBuf>,
    /// Inflectional lexicon, `surface<TAB>lemma<TAB>tag` per line.
    #[arg(long, global = true, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,
    /// Clitic rewrite rules for the lexicon.
    #[arg(long, global = true, value_name = "FILE")]
    pub clitics: Option<PathBuf>,
    /// Relation type definitions.
    #[arg(long, global = true, value_name = "FILE")]
    pub types: Option<PathBuf>,
    /// Sentence patterns used to render relations.
    #[arg(long, global = true, value_name = "FILE")]
    pub render: Option<PathBuf>,
    /// Collection templates.
    #[arg(long, global = true, value_name = "FILE")]
    pub templates: Option<PathBuf>,
    /// `default`, `none`, `all`, or a comma list of heuristics to enable.
    #[arg(long, global = true)]
    pub heuristics: Option<String>,
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::Data(format!("stdin: {e}")));
    }
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Resolved resources for one run.
pub struct Resources {
    pub file: FileConfig,
    pub lang: Lang,
    pub flags: HeuristicFlags,
    args: ResourceArgs,
}

impl Resources {
    pub fn load(args: ResourceArgs) -> Result<Self, CliError> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                toml::from_str(&read_text(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let lang = match args.lang.as_deref().or(file.lang.as_deref()) {
            Some(l) => l.parse().map_err(CliError::Usage)?,
            None => Lang::default(),
        };
        let flags = parse_heuristics(args.heuristics.as_deref().or(file.heuristics.as_deref()).unwrap_or("default"))?;
        Ok(Self { file, lang, flags, args })
    }

    fn resource(&self, flag: &Option<PathBuf>, key: &Option<PathBuf>, bundled: &str) -> Result<String, CliError> {
        match flag.as_ref().or(key.as_ref()) {
            Some(path) => read_text(path),
            None => Ok(bundled.to_string()),
        }
    }

    pub fn type_registry(&self) -> Result<TypeRegistry, CliError> {
        let text = self.resource(&self.args.types, &self.file.types, RELATION_TYPES)?;
        TypeRegistry::parse_config(&text).map_err(|e| CliError::Data(e.to_string()))
    }

    pub fn morphology(&self) -> Result<LexiconMorphology, CliError> {
        let lexicon = self.resource(&self.args.lexicon, &self.file.lexicon, self.lang.lexicon())?;
        let clitics = self.resource(&self.args.clitics, &self.file.clitics, self.lang.clitics())?;
        LexiconMorphology::parse(&lexicon, &clitics).map_err(|e| CliError::Data(e.to_string()))
    }

    pub fn pipeline(&self) -> Result<Pipeline, CliError> {
        let types = self.type_registry()?;
        let rules = self.resource(&self.args.rules, &self.file.rules, self.lang.rules())?;
        let negation = self.resource(&self.args.negation, &self.file.negation, self.lang.negation())?;
        let rules = parse_rules(&rules).map_err(|e| CliError::Data(e.to_string()))?;
        let extractor = Extractor::new(rules, NegationLexicon::parse(&negation), types.clone())
            .map_err(|e| CliError::Data(e.to_string()))?;
        Ok(Pipeline::new(
            extractor,
            Arc::new(self.morphology()?),
            Schema::new(types, ProfileVocabulary::default()),
            self.flags,
        ))
    }

    pub fn renderer(&self) -> Result<Renderer, CliError> {
        let text = self.resource(&self.args.render, &self.file.render, self.lang.render())?;
        Renderer::parse(&text, self.type_registry()?).map_err(|e| CliError::Data(e.to_string()))
    }

    pub fn templates(&self) -> Result<Vec<Template>, CliError> {
        let text = self.resource(&self.args.templates, &self.file.templates, self.lang.templates())?;
        parse_templates(&text).map_err(|e| CliError::Data(e.to_string()))
    }

    /// The flag value, else the config value, else match-all.
    pub fn profile(&self, flag: Option<&str>) -> Result<ProfileQuery, CliError> {
        match flag.or(self.file.profile.as_deref()) {
            Some(spec) => ProfileQuery::parse_spec(spec, &ProfileVocabulary::default())
                .map_err(|e| CliError::Usage(format!("--profile: {e}"))),
            None => Ok(ProfileQuery::all()),
        }
    }
}

const HEURISTICS: [&str; 6] = [
    "property_of",
    "capable_of",
    "capable_of_receiving_action",
    "thematic_kline",
    "super_thematic_kline",
    "post_filter_property_of",
];

pub fn parse_heuristics(spec: &str) -> Result<HeuristicFlags, CliError> {
    match spec.trim() {
        "default" => return Ok(HeuristicFlags::default()),
        "none" | "" => return Ok(HeuristicFlags::none()),
        "all" => return Ok(HeuristicFlags::all()),
        _ => {}
    }
    let mut flags = HeuristicFlags::none();
    for name in spec.split(',').map(str::trim) {
        let slot = match name {
            "property_of" => &mut flags.property_of,
            "capable_of" => &mut flags.capable_of,
            "capable_of_receiving_action" => &mut flags.capable_of_receiving_action,
            "thematic_kline" => &mut flags.thematic_kline,
            "super_thematic_kline" => &mut flags.super_thematic_kline,
            "post_filter_property_of" => &mut flags.post_filter_property_of,
            other => {
                return Err(CliError::Usage(format!("unknown heuristic `{other}`; known: {}", HEURISTICS.join(", "))))
            }
        };
        *slot = true;
    }
    Ok(flags)
}
