//! Pipeline configuration file (TOML).

use std::path::{Path, PathBuf};

use clarq_core::refine::UpSamplingTrainSet;
use clarq_core::{RefineConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Refinement settings; training and seed live at the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSection {
    pub n_iterations: usize,
    pub keep_fraction: f64,
    pub negative_ratio: f64,
    pub threshold: f64,
    pub up_sampling_trains_on: UpSamplingTrainSet,
}

impl Default for RefineSection {
    fn default() -> Self {
        let d = RefineConfig::default();
        RefineSection {
            n_iterations: d.n_iterations,
            keep_fraction: d.keep_fraction,
            negative_ratio: d.negative_ratio,
            threshold: d.threshold,
            up_sampling_trains_on: d.up_sampling_trains_on,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    #[default]
    Tfidf,
    Encoder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RerankSection {
    /// Empty means every ingested domain.
    pub domains: Vec<String>,
    pub n_per_domain: usize,
    pub pool_size: usize,
    pub scorer: ScorerKind,
}

impl Default for RerankSection {
    fn default() -> Self {
        RerankSection {
            domains: Vec::new(),
            n_per_domain: 1000,
            pool_size: 100,
            scorer: ScorerKind::Tfidf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSection {
    pub top_k: usize,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection { top_k: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub dump_dir: PathBuf,
    pub work_dir: PathBuf,
    /// Annotated `domain,post_id,question_text,gold_label` CSV.
    #[serde(default)]
    pub test_set: Option<PathBuf>,
    /// Domain allowlist; empty means every domain of the dump.
    #[serde(default)]
    pub domains: Vec<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub refine: RefineSection,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub rerank: RerankSection,
    #[serde(default)]
    pub stats: StatsSection,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub domains: Option<Vec<String>>,
    pub work_dir: Option<PathBuf>,
}

/// The subset of the configuration that determines artifact contents.
#[derive(Serialize)]
struct Hashed<'a> {
    seed: u64,
    domains: &'a [String],
    refine: &'a RefineSection,
    train: &'a TrainConfig,
    rerank: &'a RerankSection,
    stats: &'a StatsSection,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads `path`, resolves relative paths against its directory and
    /// applies `overrides`.
    pub fn load(path: &Path, overrides: &Overrides) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.dump_dir = base.join(&cfg.dump_dir);
        cfg.work_dir = base.join(&cfg.work_dir);
        cfg.test_set = cfg.test_set.map(|t| base.join(t));
        if let Some(seed) = overrides.seed {
            cfg.seed = seed;
        }
        if let Some(domains) = &overrides.domains {
            cfg.domains = domains.clone();
        }
        if let Some(dir) = &overrides.work_dir {
            cfg.work_dir = dir.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if !self.dump_dir.is_dir() {
            return Err(CliError::Config(format!("dump_dir {} does not exist", self.dump_dir.display())));
        }
        if let Some(t) = &self.test_set {
            if !t.is_file() {
                return Err(CliError::Config(format!("test_set {} does not exist", t.display())));
            }
        }
        if self.rerank.pool_size < 2 {
            return Err(CliError::Config("rerank.pool_size must be at least 2".into()));
        }
        if self.stats.top_k == 0 {
            return Err(CliError::Config("stats.top_k must be at least 1".into()));
        }
        self.refine_config().validate()?;
        Ok(())
    }

    pub fn refine_config(&self) -> RefineConfig {
        RefineConfig {
            n_iterations: self.refine.n_iterations,
            keep_fraction: self.refine.keep_fraction,
            negative_ratio: self.refine.negative_ratio,
            seed: self.seed,
            threshold: self.refine.threshold,
            up_sampling_trains_on: self.refine.up_sampling_trains_on,
            train: self.train.clone(),
        }
    }

    /// Hex SHA-256 of everything except paths.
    pub fn config_hash(&self) -> String {
        let view = Hashed {
            seed: self.seed,
            domains: &self.domains,
            refine: &self.refine,
            train: &self.train,
            rerank: &self.rerank,
            stats: &self.stats,
        };
        let json = serde_json::to_vec(&view).expect("config serializes");
        hex(&Sha256::digest(json))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
