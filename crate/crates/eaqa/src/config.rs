//! TOML run configuration. Every section is optional; command-line flags
//! override whatever the file sets.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io;
use crate::llm::EndpointConfig;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub questions: QuestionSection,
    #[serde(default)]
    pub augment: AugmentSection,
    #[serde(default)]
    pub policy: PolicySection,
    pub endpoint: Option<EndpointConfig>,
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub profile: Option<String>,
    pub ontology: Option<PathBuf>,
    pub coref: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextualizedSource {
    pub path: PathBuf,
    #[serde(default = "train_split")]
    pub split: String,
}

fn train_split() -> String {
    "train".into()
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuestionSection {
    /// JSON map role -> wh-word overriding the default lexicon.
    pub lexicon: Option<PathBuf>,
    /// Strategy name (`prompt_zero`, `prompt_few`) -> bank file.
    #[serde(default)]
    pub banks: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub contextualized: Vec<ContextualizedSource>,
    /// Directory of prompt asset overrides.
    pub assets_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    pub method: Option<String>,
    pub strict_inter: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    pub train_strategies: Option<Vec<String>>,
    pub test_strategy: Option<String>,
    pub contextualized_per_role_cap: Option<usize>,
    pub context_window: Option<usize>,
}

impl RunConfig {
    /// Reads a config file; relative paths inside resolve against its directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = io::read_to_string(path).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let fix_opt = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        };
        fix_opt(&mut self.output_dir);
        fix_opt(&mut self.cache_dir);
        fix_opt(&mut self.corpus.train);
        fix_opt(&mut self.corpus.dev);
        fix_opt(&mut self.corpus.test);
        fix_opt(&mut self.corpus.ontology);
        fix_opt(&mut self.corpus.coref);
        fix_opt(&mut self.questions.lexicon);
        fix_opt(&mut self.questions.assets_dir);
        for p in self.questions.banks.values_mut() {
            fix(p);
        }
        for c in &mut self.questions.contextualized {
            fix(&mut c.path);
        }
    }

    /// Every referenced input path must exist.
    pub fn validate(&self) -> Result<()> {
        let mut paths: Vec<&Path> = Vec::new();
        let c = &self.corpus;
        paths.extend([&c.train, &c.dev, &c.test, &c.ontology, &c.coref].into_iter().flatten().map(PathBuf::as_path));
        paths.extend(self.questions.lexicon.as_deref());
        paths.extend(self.questions.assets_dir.as_deref());
        paths.extend(self.questions.banks.values().map(PathBuf::as_path));
        paths.extend(self.questions.contextualized.iter().map(|c| c.path.as_path()));
        for p in paths {
            if !p.exists() {
                return Err(Error::Config(format!("referenced file {} does not exist", p.display())));
            }
        }
        if let Some(ep) = &self.endpoint {
            ep.validate().map_err(|m| Error::Config(format!("endpoint: {m}")))?;
        }
        if let Some(v) = self.schema_version {
            if v != eaqa_core::qadata::SCHEMA_VERSION {
                return Err(Error::Config(format!("unsupported schema_version {v}")));
            }
        }
        Ok(())
    }
}
