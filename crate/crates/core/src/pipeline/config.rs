use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datasource::DEFAULT_LOOKUP_BATCH;
use crate::error::{Error, Result};
use crate::genmodels::{GenerationConfig, GenerationModelId, MisspellingTable, UsernameConstraints};
use crate::similarity::DEFAULT_IMAGE_THRESHOLD;

pub fn default_keywords() -> Vec<String> {
    vec!["fan".into(), "parody".into()]
}

/// Generator settings as written in a config file. Missing keys take the
/// generator defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSettings {
    pub models: Option<Vec<GenerationModelId>>,
    pub self_repetition: Option<bool>,
    pub stacking: Option<bool>,
    pub stacking_pairs: Option<Vec<(GenerationModelId, GenerationModelId)>>,
    pub misspellings: Option<Vec<(String, String)>>,
    pub max_len: Option<usize>,
    pub min_len: Option<usize>,
    pub max_depth: Option<usize>,
    pub max_stack_depth: Option<usize>,
}

impl GenerationSettings {
    pub fn to_config(&self) -> Result<GenerationConfig> {
        let mut cfg = match &self.models {
            Some(m) => GenerationConfig::with_models(m.iter().copied()),
            None => GenerationConfig::default(),
        };
        if let Some(v) = self.self_repetition {
            cfg.self_repetition = v;
        }
        if let Some(v) = self.stacking {
            cfg.stacking = v;
        }
        if let Some(pairs) = &self.stacking_pairs {
            cfg.stacking_pairs = pairs.iter().copied().collect::<BTreeSet<_>>();
        }
        if let Some(rules) = &self.misspellings {
            let pairs: Vec<(&str, &str)> = rules.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            cfg.misspelling_table = MisspellingTable::from_pairs(&pairs)?;
        }
        let defaults = UsernameConstraints::default();
        cfg.constraints.max_len = self.max_len.unwrap_or(defaults.max_len);
        cfg.constraints.min_len = self.min_len.unwrap_or(defaults.min_len);
        if let Some(v) = self.max_depth {
            cfg.max_depth = v;
        }
        if let Some(v) = self.max_stack_depth {
            cfg.max_stack_depth = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Scan settings, normally read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub generation: GenerationSettings,
    /// Model bundle produced by `train`. Relative paths resolve against the
    /// config file's directory.
    pub model_path: Option<PathBuf>,
    /// Minimum suspicious probability for a pair to be flagged.
    pub threshold: f64,
    pub post_filter_keywords: Vec<String>,
    /// Skip pairs where either account lacks a face embedding.
    pub face_required: bool,
    pub image_threshold: f64,
    pub lookup_batch: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            generation: GenerationSettings::default(),
            model_path: None,
            threshold: 0.5,
            post_filter_keywords: default_keywords(),
            face_required: false,
            image_threshold: DEFAULT_IMAGE_THRESHOLD,
            lookup_batch: DEFAULT_LOOKUP_BATCH,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(model), Some(dir)) = (&cfg.model_path, path.parent()) {
            if model.is_relative() {
                cfg.model_path = Some(dir.join(model));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("threshold {} is outside [0, 1]", self.threshold)));
        }
        if !(self.image_threshold.is_finite() && self.image_threshold > 0.0) {
            return Err(Error::Config("image_threshold must be positive".into()));
        }
        if self.lookup_batch == 0 {
            return Err(Error::Config("lookup_batch must be positive".into()));
        }
        self.generation.to_config().map(|_| ())
    }
}
