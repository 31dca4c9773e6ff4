//! Run configuration: a TOML file, then command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use topicseg::baselines::{GraphParams, TroughParams};
use topicseg::corpus::{ConcatOptions, FilterRules, IngestOptions};
use topicseg::gateway::ProviderConfig;
use topicseg::segmenter::{parse_examples, SegmenterConfig};

use crate::errors::{config_error, ConfigError};

/// Prompt texts and few-shot examples loaded from files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PromptFiles {
    pub system_prompt: Option<PathBuf>,
    pub segment_instruction: Option<PathBuf>,
    pub recursive_instruction: Option<PathBuf>,
    pub segment_examples: Option<PathBuf>,
    pub recursive_examples: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricSettings {
    pub n: usize,
    /// Pk / WindowDiff probe width; derived from the reference when unset.
    pub k: Option<usize>,
}

impl Default for MetricSettings {
    fn default() -> Self {
        Self { n: 2, k: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineSettings {
    pub split_k: usize,
    pub trough: TroughParams,
    pub graph: GraphParams,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        Self {
            split_k: 5,
            trough: TroughParams::default(),
            graph: GraphParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbeddingSettings {
    /// `hashing`, `http`, or a path to a vectors file. Unset means hashing
    /// for the embedding baselines and no embeddings for the LLM segmenter.
    pub source: Option<String>,
    pub dimension: usize,
    pub provider: ProviderConfig,
}

impl Default for EmbeddingSettings {
    fn default() -> Self {
        Self {
            source: None,
            dimension: 256,
            provider: ProviderConfig {
                endpoint: "http://localhost:8080/embed".into(),
                ..ProviderConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSettings {
    pub ingest: IngestOptions,
    pub filter: FilterRules,
    pub concat: ConcatOptions,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub segmenter: SegmenterConfig,
    pub prompts: PromptFiles,
    pub provider: ProviderConfig,
    pub metrics: MetricSettings,
    pub baselines: BaselineSettings,
    pub embeddings: EmbeddingSettings,
    pub corpus: CorpusSettings,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
}

fn read_text(path: &Path, base: &Path) -> Result<String> {
    let full = base.join(path);
    fs::read_to_string(&full)
        .with_context(|| ConfigError(format!("cannot read {}", full.display())))
}

impl RunConfig {
    /// Parses the file and loads any prompt files it names, relative to
    /// the file's directory.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| config_error(format!("config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.apply_prompt_files(base)?;
        Ok(cfg)
    }

    fn apply_prompt_files(&mut self, base: &Path) -> Result<()> {
        let p = self.prompts.clone();
        let s = &mut self.segmenter;
        if let Some(f) = &p.system_prompt {
            s.system_prompt = read_text(f, base)?;
        }
        if let Some(f) = &p.segment_instruction {
            s.segment_instruction = read_text(f, base)?;
        }
        if let Some(f) = &p.recursive_instruction {
            s.recursive_instruction = read_text(f, base)?;
        }
        if let Some(f) = &p.segment_examples {
            s.segment_examples = parse_examples(&read_text(f, base)?)
                .map_err(|e| config_error(format!("{}: {e}", f.display())))?;
        }
        if let Some(f) = &p.recursive_examples {
            s.recursive_examples = parse_examples(&read_text(f, base)?)
                .map_err(|e| config_error(format!("{}: {e}", f.display())))?;
        }
        Ok(())
    }

    pub fn check(&self) -> Result<()> {
        self.segmenter
            .validate()
            .map_err(|e| config_error(e.to_string()))?;
        if self.metrics.n == 0 {
            return Err(config_error("metrics.n must be at least 1"));
        }
        if self.baselines.split_k == 0 {
            return Err(config_error("baselines.split_k must be at least 1"));
        }
        Ok(())
    }
}
