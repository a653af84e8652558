//! Run configuration, read from a TOML file.
//!
//! ```toml
//! backend = "mock"          # mock | api
//! concurrency = 4
//! output = "out"
//! max_elements = 40
//! defect_rate = 25          # percent of mock diagrams given a syntax defect
//! min_name_words = 2
//!
//! [budgets]                 # bytes, at least 4096
//! single = 61440
//! deep = 102400
//!
//! [weights]                 # importance weights, non-negative
//! inheritance = 10.0
//! name = 15.0
//! call = 3.0
//!
//! [density_bands]           # relationships per element, [low, high]
//! class = [0.5, 1.5]
//!
//! [[corpus]]
//! name = "shop"             # defaults to the directory name
//! path = "fixtures/shop"    # relative to the config file
//! languages = ["java", "python"]
//! label = "mixed"           # language column in reports
//! ```
//!
//! Every key is optional. Corpus entries are only read by `evaluate`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use c2u_agents::prompts::DEFAULT_MAX_ELEMENTS;
use c2u_agents::context::DEFAULT_CONCURRENCY;
use c2u_core::metrics::MetricsConfig;
use c2u_core::view::{ScoreWeights, ViewOptions, DEEP_BUDGET_BYTES, SINGLE_BUDGET_BYTES};
use c2u_core::{DiagramType, Language};
use serde::Deserialize;

pub const MIN_BUDGET_BYTES: usize = 4 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: `{key}`: {message}")]
    Parse { path: PathBuf, key: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("corpus entry {index} ({name}): {message}")]
    Entry { index: usize, name: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Api,
}

impl std::str::FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mock" => Ok(BackendKind::Mock),
            "api" => Ok(BackendKind::Api),
            other => Err(format!("unknown backend `{other}` (expected mock or api)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    pub single: usize,
    pub deep: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { single: SINGLE_BUDGET_BYTES, deep: DEEP_BUDGET_BYTES }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Weights {
    pub inheritance: f64,
    pub name: f64,
    pub call: f64,
}

impl Default for Weights {
    fn default() -> Self {
        let w = ScoreWeights::default();
        Weights { inheritance: w.inheritance, name: w.name, call: w.call }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: Option<String>,
    pub path: PathBuf,
    /// Languages to extract; empty means every detected language.
    #[serde(default)]
    pub languages: Vec<Language>,
    pub label: Option<String>,
}

impl CorpusEntry {
    pub fn project_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "project".into())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub backend: BackendKind,
    pub concurrency: usize,
    pub output: PathBuf,
    pub max_elements: usize,
    pub defect_rate: u8,
    pub min_name_words: usize,
    pub budgets: Budgets,
    pub weights: Weights,
    pub density_bands: BTreeMap<DiagramType, [f64; 2]>,
    pub corpus: Vec<CorpusEntry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let metrics = MetricsConfig::default();
        RunConfig {
            backend: BackendKind::Mock,
            concurrency: DEFAULT_CONCURRENCY,
            output: PathBuf::from("out"),
            max_elements: DEFAULT_MAX_ELEMENTS,
            defect_rate: 25,
            min_name_words: metrics.min_name_words,
            budgets: Budgets::default(),
            weights: Weights::default(),
            density_bands: metrics.density_bands.into_iter().map(|(dt, (lo, hi))| (dt, [lo, hi])).collect(),
            corpus: Vec::new(),
        }
    }
}

impl RunConfig {
    /// Reads and validates `path`. Relative corpus paths and the output
    /// root are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let mut cfg = RunConfig::parse(&text).map_err(|(key, message)| ConfigError::Parse { path: path.to_path_buf(), key, message })?;
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.output.is_relative() {
            cfg.output = base.join(&cfg.output);
        }
        for entry in &mut cfg.corpus {
            if entry.path.is_relative() {
                entry.path = base.join(&entry.path);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without validating. Errors carry the offending key path.
    pub fn parse(text: &str) -> Result<Self, (String, String)> {
        let de = toml::Deserializer::parse(text).map_err(|e| ("<document>".to_string(), e.to_string()))?;
        let mut cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| (e.path().to_string(), e.inner().to_string()))?;
        let defaults = MetricsConfig::default();
        for (dt, (lo, hi)) in defaults.density_bands {
            cfg.density_bands.entry(dt).or_insert([lo, hi]);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        for (key, value) in [("budgets.single", self.budgets.single), ("budgets.deep", self.budgets.deep)] {
            if value < MIN_BUDGET_BYTES {
                return invalid(format!("{key} = {value} is below the minimum of {MIN_BUDGET_BYTES} bytes"));
            }
        }
        let w = &self.weights;
        for (key, value) in [("weights.inheritance", w.inheritance), ("weights.name", w.name), ("weights.call", w.call)] {
            if !value.is_finite() || value < 0.0 {
                return invalid(format!("{key} = {value} must be a non-negative number"));
            }
        }
        for (dt, [lo, hi]) in &self.density_bands {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= *lo && lo <= hi) {
                return invalid(format!("density_bands.{dt} = [{lo}, {hi}] must satisfy 0 <= low <= high"));
            }
        }
        if self.concurrency == 0 {
            return invalid("concurrency must be at least 1".into());
        }
        if self.max_elements == 0 {
            return invalid("max_elements must be at least 1".into());
        }
        if self.defect_rate > 100 {
            return invalid(format!("defect_rate = {} is not a percentage", self.defect_rate));
        }
        if self.min_name_words == 0 {
            return invalid("min_name_words must be at least 1".into());
        }
        let mut seen = BTreeMap::new();
        for (index, entry) in self.corpus.iter().enumerate() {
            let name = entry.project_name();
            let fail = |message: String| Err(ConfigError::Entry { index, name: name.clone(), message });
            if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
                return fail("name must be a plain directory name".into());
            }
            if !entry.path.is_dir() {
                return fail(format!("{} is not a directory", entry.path.display()));
            }
            if let Some(first) = seen.insert(name.clone(), index) {
                return fail(format!("duplicate project name (also entry {first})"));
            }
        }
        Ok(())
    }

    pub fn view_options(&self) -> ViewOptions {
        ViewOptions {
            weights: ScoreWeights { inheritance: self.weights.inheritance, name: self.weights.name, call: self.weights.call },
            single_budget: self.budgets.single,
            deep_budget: self.budgets.deep,
        }
    }

    pub fn metrics_config(&self) -> MetricsConfig {
        MetricsConfig {
            density_bands: self.density_bands.iter().map(|(dt, [lo, hi])| (*dt, (*lo, *hi))).collect(),
            min_name_words: self.min_name_words,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn partial_bands_keep_the_other_defaults() {
        let cfg = RunConfig::parse("[density_bands]\nclass = [1.0, 2.0]\n").unwrap();
        assert_eq!(cfg.density_bands[&DiagramType::Class], [1.0, 2.0]);
        assert_eq!(cfg.density_bands[&DiagramType::Sequence], [2.0, 8.0]);
    }

    #[test]
    fn ranges_are_enforced() {
        for text in [
            "[budgets]\nsingle = 4095\n",
            "[weights]\ncall = -1.0\n",
            "[density_bands]\nclass = [2.0, 1.0]\n",
            "concurrency = 0\n",
            "defect_rate = 101\n",
        ] {
            let cfg = RunConfig::parse(text).unwrap();
            assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))), "{text}");
        }
        let cfg = RunConfig::parse("[budgets]\nsingle = 4096\ndeep = 4096\n").unwrap();
        cfg.validate().unwrap();
    }

    #[test]
    fn parse_errors_name_the_key() {
        let (key, _) = RunConfig::parse("[[corpus]]\npath = \"a\"\n[[corpus]]\npath = \"b\"\nlanguages = [\"cobol\"]\n").unwrap_err();
        assert_eq!(key, "corpus[1].languages[0]");
        let (key, _) = RunConfig::parse("bogus = 1\n").unwrap_err();
        assert_eq!(key, "bogus");
    }
}
