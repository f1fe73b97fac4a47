use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const UNK: u32 = 3;
pub const SPECIALS: [&str; 4] = ["<pad>", "<s>", "</s>", "<unk>"];

/// Token strings and their ids. The four specials always occupy ids 0-3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl Vocab {
    /// Specials followed by `symbols` in order, duplicates dropped.
    pub fn from_symbols<I, S>(symbols: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Self {
            tokens: Vec::new(),
            index: BTreeMap::new(),
        };
        for s in SPECIALS {
            v.push(String::from(s));
        }
        for s in symbols {
            let s = s.into();
            if SPECIALS.contains(&s.as_str()) {
                return Err(invalid("vocabulary symbols may not reuse special token names"));
            }
            if s.is_empty() || s.chars().any(char::is_whitespace) {
                return Err(invalid("vocabulary symbols must be non-empty and whitespace-free"));
            }
            v.push(s);
        }
        Ok(v)
    }

    /// Rebuilds a vocabulary from a full token list (specials included), as
    /// stored in a checkpoint.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < SPECIALS.len() || tokens[..SPECIALS.len()] != SPECIALS {
            return Err(invalid("token list must start with the special tokens"));
        }
        let v = Self::from_symbols(tokens.into_iter().skip(SPECIALS.len()))?;
        Ok(v)
    }

    fn push(&mut self, s: String) {
        if !self.index.contains_key(&s) {
            self.index.insert(s.clone(), self.tokens.len() as u32);
            self.tokens.push(s);
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Unknown tokens map to [`UNK`].
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t.as_ref()).unwrap_or(UNK)).collect()
    }

    /// Stops at the first EOS; PAD and BOS are skipped.
    pub fn decode(&self, ids: &[u32]) -> Vec<String> {
        ids.iter()
            .take_while(|&&i| i != EOS)
            .filter(|&&i| i != PAD && i != BOS)
            .filter_map(|&i| self.token(i).map(String::from))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub embed_dim: usize,
    /// Decoder width and encoder output width; each encoder direction gets
    /// half.
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub dropout: f64,
    pub vocab: Vocab,
}

impl ModelConfig {
    /// The paper-scale configuration: 500-dim embeddings and states, two
    /// layers, dropout 0.3.
    pub fn paper(vocab: Vocab) -> Self {
        Self {
            embed_dim: 500,
            hidden_dim: 500,
            num_layers: 2,
            dropout: 0.3,
            vocab,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.hidden_dim == 0 || self.num_layers == 0 {
            return Err(invalid("model dimensions and layer count must be positive"));
        }
        if self.hidden_dim % 2 != 0 {
            return Err(invalid("hidden_dim must be even (split across encoder directions)"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(invalid("dropout must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn direction_dim(&self) -> usize {
        self.hidden_dim / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub initial_lr: f64,
    pub decay_factor: f64,
    /// First (1-based) epoch after which the learning rate always decays.
    pub decay_start_epoch: usize,
    pub epochs: usize,
    /// Weights start uniform on `[-init_range, init_range]`.
    pub init_range: f64,
    pub seed: u64,
    pub max_decode_len: usize,
    /// Global gradient-norm clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            initial_lr: 1.0,
            decay_factor: 0.5,
            decay_start_epoch: 8,
            epochs: 15,
            init_range: 0.1,
            seed: 1,
            max_decode_len: 200,
            clip_norm: Some(5.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 || self.decay_start_epoch == 0 || self.max_decode_len == 0 {
            return Err(invalid("batch size, epochs, decay start and decode length must be positive"));
        }
        if !(self.initial_lr >= 0.0 && self.initial_lr.is_finite()) {
            return Err(invalid("learning rate must be finite and non-negative"));
        }
        if !(self.decay_factor > 0.0 && self.decay_factor < 1.0) {
            return Err(invalid("decay factor must lie in (0, 1)"));
        }
        if !(self.init_range > 0.0 && self.init_range.is_finite()) {
            return Err(invalid("init range must be positive"));
        }
        if matches!(self.clip_norm, Some(c) if !(c > 0.0)) {
            return Err(invalid("clip norm must be positive"));
        }
        Ok(())
    }
}
