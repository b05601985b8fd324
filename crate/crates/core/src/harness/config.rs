use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{ColorParams, LeafParams};
use crate::learners::{ModelKind, TreeParams};
use crate::memsel::SearchParams;
use crate::synth::{ColorDatasetSpec, CorruptionKind, LeafDatasetSpec, SeverityTable};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetConfig {
    Color(ColorDatasetSpec),
    Leaf(LeafDatasetSpec),
    /// Directories written by `gen-color`, `gen-leaf` or `corrupt`; each
    /// holds a `manifest.json`.
    Manifest { train: PathBuf, test: PathBuf },
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig::Color(ColorDatasetSpec::default())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimilarityConfig {
    Color(ColorParams),
    /// Leaf features, binarized by a tree trained on the training labels.
    LeafTree {
        #[serde(default)]
        leaf: LeafParams,
        #[serde(default)]
        tree: TreeParams,
    },
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig::Color(ColorParams::default())
    }
}

/// Features seen by the per-cluster and baseline classifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputConfig {
    /// Per-channel means over a `grid × grid` tiling, scaled to `[0, 1]`.
    Pixels { grid: usize },
    /// The similarity's own feature representation.
    Expert,
}

impl Default for InputConfig {
    fn default() -> Self {
        InputConfig::Pixels { grid: 8 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub similarity: SimilarityConfig,
    pub search: SearchParams,
    pub model: ModelKind,
    /// Model for the global baseline; defaults to `model`.
    pub baseline: Option<ModelKind>,
    pub input: InputConfig,
    pub corruptions: Vec<CorruptionKind>,
    pub severities: Vec<u8>,
    pub severity_table: SeverityTable,
    pub output: OutputConfig,
    pub seed: u64,
    /// Worker threads; falls back to the environment, then to all cores.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            similarity: SimilarityConfig::default(),
            search: SearchParams::default(),
            model: ModelKind::Majority,
            baseline: None,
            input: InputConfig::default(),
            corruptions: Vec::new(),
            severities: vec![1, 2, 3, 4, 5],
            severity_table: SeverityTable::default(),
            output: OutputConfig::default(),
            seed: 0,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        match &self.dataset {
            DatasetConfig::Color(spec) => spec.validate()?,
            DatasetConfig::Leaf(spec) => spec.validate()?,
            DatasetConfig::Manifest { .. } => {}
        }
        if let Some(s) = self.severities.iter().find(|s| !(1..=5).contains(*s)) {
            return Err(Error::Config(format!("severity {s} outside 1..=5")));
        }
        if let InputConfig::Pixels { grid } = self.input {
            if grid == 0 {
                return Err(Error::Config("pixel grid must be at least 1".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn baseline_kind(&self) -> ModelKind {
        self.baseline.unwrap_or(self.model)
    }

    /// SHA-256 of the canonical JSON form, ignoring the thread count.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.threads = None;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}
