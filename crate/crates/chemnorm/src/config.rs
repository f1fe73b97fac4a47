//! Pipeline configuration, loadable from TOML.
//!
//! Every key is optional; missing keys take the defaults below.
//!
//! ```toml
//! threshold = 1          # spelling-correction edit budget, 0 disables
//! min_count = 5          # frequency cutoff for non-systematic words
//! num_merges = 5000      # BPE merge operations
//! beam_size = 5
//! bucket_width = 20      # accuracy-by-length bucket width (characters)
//! threads = 0            # batch standardization workers, 0 = all cores
//! checkpoint_dtype = "f64"
//!
//! [split]
//! train = 0.80
//! test = 0.19
//! dev = 0.01
//! seed = 0
//!
//! [model]
//! embed_dim = 500
//! hidden_dim = 500
//! num_layers = 2
//! dropout = 0.3
//!
//! [train]
//! batch_size = 64
//! initial_lr = 1.0
//! decay_factor = 0.5
//! decay_start_epoch = 8
//! epochs = 15
//! init_range = 0.1
//! seed = 1
//! max_decode_len = 200
//! clip_norm = 5.0        # 0 disables clipping
//!
//! [paths]
//! vocab = "vocab.tsv"
//! merges = "merges.txt"
//! checkpoint = "model.ckpt"
//! ```

use std::path::Path;

use chemnorm_core::corpus::{SplitRatios, DEFAULT_RATIOS};
use chemnorm_core::neural::{ModelConfig, TrainConfig, Vocab};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::Dtype;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub threshold: usize,
    pub min_count: usize,
    pub num_merges: usize,
    pub beam_size: usize,
    pub bucket_width: usize,
    pub threads: usize,
    pub checkpoint_dtype: Dtype,
    pub split: SplitSettings,
    pub model: ModelSettings,
    pub train: TrainSettings,
    pub paths: ArtifactPaths,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: 1,
            min_count: chemnorm_core::fuzzy::DEFAULT_MIN_COUNT,
            num_merges: 5000,
            beam_size: 5,
            bucket_width: 20,
            threads: 0,
            checkpoint_dtype: Dtype::F64,
            split: SplitSettings::default(),
            model: ModelSettings::default(),
            train: TrainSettings::default(),
            paths: ArtifactPaths::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSettings {
    pub train: f64,
    pub test: f64,
    pub dev: f64,
    pub seed: u64,
}

impl Default for SplitSettings {
    fn default() -> Self {
        Self {
            train: DEFAULT_RATIOS.train,
            test: DEFAULT_RATIOS.test,
            dev: DEFAULT_RATIOS.dev,
            seed: 0,
        }
    }
}

impl SplitSettings {
    pub fn ratios(&self) -> SplitRatios {
        SplitRatios {
            train: self.train,
            test: self.test,
            dev: self.dev,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSettings {
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub dropout: f64,
}

impl Default for ModelSettings {
    fn default() -> Self {
        Self {
            embed_dim: 500,
            hidden_dim: 500,
            num_layers: 2,
            dropout: 0.3,
        }
    }
}

impl ModelSettings {
    pub fn to_config(&self, vocab: Vocab) -> ModelConfig {
        ModelConfig {
            embed_dim: self.embed_dim,
            hidden_dim: self.hidden_dim,
            num_layers: self.num_layers,
            dropout: self.dropout,
            vocab,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub batch_size: usize,
    pub initial_lr: f64,
    pub decay_factor: f64,
    pub decay_start_epoch: usize,
    pub epochs: usize,
    pub init_range: f64,
    pub seed: u64,
    pub max_decode_len: usize,
    pub clip_norm: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            batch_size: t.batch_size,
            initial_lr: t.initial_lr,
            decay_factor: t.decay_factor,
            decay_start_epoch: t.decay_start_epoch,
            epochs: t.epochs,
            init_range: t.init_range,
            seed: t.seed,
            max_decode_len: t.max_decode_len,
            clip_norm: t.clip_norm.unwrap_or(0.0),
        }
    }
}

impl TrainSettings {
    pub fn to_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            initial_lr: self.initial_lr,
            decay_factor: self.decay_factor,
            decay_start_epoch: self.decay_start_epoch,
            epochs: self.epochs,
            init_range: self.init_range,
            seed: self.seed,
            max_decode_len: self.max_decode_len,
            clip_norm: (self.clip_norm > 0.0).then_some(self.clip_norm),
        }
    }
}

/// Artifact file names, relative to the artifact directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArtifactPaths {
    pub vocab: String,
    pub merges: String,
    pub checkpoint: String,
}

impl Default for ArtifactPaths {
    fn default() -> Self {
        Self {
            vocab: "vocab.tsv".into(),
            merges: "merges.txt".into(),
            checkpoint: "model.ckpt".into(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
        cfg.validate().map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.beam_size == 0 {
            return Err("beam_size must be at least 1".into());
        }
        if self.min_count == 0 {
            return Err("min_count must be at least 1".into());
        }
        if self.bucket_width == 0 {
            return Err("bucket_width must be at least 1".into());
        }
        self.split.ratios().validate().map_err(|e| e.to_string())?;
        self.train.to_config().validate().map_err(|e| e.to_string())?;
        self.model
            .to_config(Vocab::from_symbols(Vec::<String>::new()).expect("specials only"))
            .validate()
            .map_err(|e| e.to_string())?;
        for p in [&self.paths.vocab, &self.paths.merges, &self.paths.checkpoint] {
            if p.is_empty() || p.contains('/') || p.contains('\\') || p == ".." {
                return Err(format!("artifact file name {p:?} must be a plain file name"));
            }
        }
        Ok(())
    }

    pub fn worker_threads(&self) -> usize {
        match self.threads {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_paper() {
        let c = PipelineConfig::default();
        assert_eq!((c.threshold, c.num_merges, c.beam_size), (1, 5000, 5));
        assert_eq!((c.model.embed_dim, c.model.num_layers), (500, 2));
        assert_eq!(c.train.to_config(), TrainConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn partial_toml_keeps_defaults() {
        let c = PipelineConfig::from_toml("threshold = 0\n[model]\nhidden_dim = 64\n").unwrap();
        assert_eq!(c.threshold, 0);
        assert_eq!(c.model.hidden_dim, 64);
        assert_eq!(c.model.embed_dim, 500);
        assert_eq!(c.num_merges, 5000);
    }

    #[test]
    fn toml_round_trip() {
        let mut c = PipelineConfig::default();
        c.checkpoint_dtype = Dtype::F32;
        c.train.clip_norm = 0.0;
        assert_eq!(PipelineConfig::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(c.train.to_config().clip_norm, None);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(PipelineConfig::from_toml("treshold = 1\n").is_err());
        let c = PipelineConfig::from_toml("beam_size = 0\n").unwrap();
        assert!(c.validate().is_err());
        let c = PipelineConfig::from_toml("[paths]\nvocab = \"../v.tsv\"\n").unwrap();
        assert!(c.validate().is_err());
    }
}
