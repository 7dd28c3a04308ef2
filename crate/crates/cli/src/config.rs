//! `chunkorder.toml`: corpora, optional annotation and semantics sections,
//! ranking limits and display rounding.

use std::fs;
use std::path::{Path, PathBuf};

use chunkorder_annotate::AnnotationConfig;
use chunkorder_core::{Language, TagFilter};
use serde::{Deserialize, Deserializer};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpora: Vec<CorpusEntry>,
    #[serde(default)]
    pub annotation: Option<AnnotationConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_top_k_patterns")]
    pub top_k_patterns: usize,
    #[serde(default = "default_top_k_combos")]
    pub top_k_combos: usize,
    #[serde(default)]
    pub rounding: Rounding,
    #[serde(default)]
    pub semantics: Option<SemanticsConfig>,
    /// Directory the config was read from; relative paths resolve here.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    /// As written in the config; see [`PipelineConfig::resolve`].
    pub path: PathBuf,
    #[serde(deserialize_with = "language")]
    pub language: Language,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticsConfig {
    pub embeddings: PathBuf,
    /// Tag filters (comma-separated tags) whose centroids are compared
    /// pairwise.
    #[serde(default)]
    pub subsets: Vec<String>,
    /// Tags used to color the projection scatter, first match wins.
    #[serde(default)]
    pub color_by: Vec<String>,
}

/// Decimal places per table family; `p_value` is significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rounding {
    pub ttr: u32,
    pub per_line: u32,
    pub proportion: u32,
    pub position: u32,
    pub statistic: u32,
    pub p_value: u32,
    pub probability: u32,
    pub cosine_pct: u32,
    pub coordinate: u32,
}

impl Default for Rounding {
    fn default() -> Self {
        Rounding {
            ttr: 3,
            per_line: 2,
            proportion: 2,
            position: 4,
            statistic: 2,
            p_value: 4,
            probability: 2,
            cosine_pct: 2,
            coordinate: 6,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("chunkorder-report")
}

fn default_top_k_patterns() -> usize {
    20
}

fn default_top_k_combos() -> usize {
    50
}

fn language<'de, D: Deserializer<'de>>(d: D) -> Result<Language, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.corpora.is_empty() {
            return Err(CliError::usage("config lists no corpora"));
        }
        let mut names = std::collections::BTreeSet::new();
        for c in &self.corpora {
            let valid = !c.name.is_empty()
                && c.name.chars().all(|ch| ch.is_alphanumeric() || "-_.".contains(ch))
                && !c.name.starts_with('.');
            if !valid {
                return Err(CliError::usage(format!(
                    "corpus name `{}` must be letters, digits, `-`, `_` or `.`",
                    c.name
                )));
            }
            if !names.insert(c.name.as_str()) {
                return Err(CliError::usage(format!("corpus name `{}` is repeated", c.name)));
            }
        }
        if let Some(a) = &self.annotation {
            a.validate().map_err(|e| CliError::usage(e.to_string()))?;
        }
        if let Some(s) = &self.semantics {
            for subset in &s.subsets {
                subset.parse::<TagFilter>().map_err(|e| CliError::usage(format!("subset `{subset}`: {e}")))?;
            }
        }
        Ok(())
    }

    /// Resolves a path from the config against the config's directory.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}
