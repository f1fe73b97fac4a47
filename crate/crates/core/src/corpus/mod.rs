//! Parallel corpus handling: pair parsing, seeded splitting, and
//! character-level noise augmentation.

mod augment;
pub mod synthetic;

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

pub use augment::{augment_pairs, AugmentationConfig, Augmenter, EditKind};

/// The paper's train / test / dev proportions.
pub const DEFAULT_RATIOS: SplitRatios = SplitRatios {
    train: 0.80,
    test: 0.19,
    dev: 0.01,
};

/// One (non-systematic, systematic) example.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataPair {
    pub non_systematic: String,
    pub systematic: String,
}

/// Trims and collapses internal whitespace runs to one space.
pub fn normalize_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for w in name.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

impl DataPair {
    pub fn new(non_systematic: &str, systematic: &str) -> Result<Self> {
        let non_systematic = normalize_name(non_systematic);
        let systematic = normalize_name(systematic);
        if non_systematic.is_empty() || systematic.is_empty() {
            return Err(invalid("both names of a pair must be non-empty"));
        }
        Ok(Self {
            non_systematic,
            systematic,
        })
    }
}

/// Parses tab-separated `non-systematic<TAB>systematic` lines. Empty lines
/// are skipped; line numbers in errors are 1-based.
pub fn parse_pairs(text: &str) -> Result<Vec<DataPair>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: i + 1,
                message: alloc::format!("expected 2 tab-separated fields, found {}", fields.len()),
            });
        }
        let pair = DataPair::new(fields[0], fields[1]).map_err(|_| Error::Parse {
            line: i + 1,
            message: "empty name".into(),
        })?;
        out.push(pair);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub test: f64,
    pub dev: f64,
}

impl SplitRatios {
    /// Each ratio positive, summing to 1 within 1e-9.
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.test, self.dev];
        if all.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(invalid("split ratios must be positive"));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(invalid("split ratios must sum to 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSplit {
    pub train: Vec<DataPair>,
    pub test: Vec<DataPair>,
    pub dev: Vec<DataPair>,
    pub seed: u64,
}

/// Shuffles with a seeded generator and cuts contiguous slices. Test and dev
/// get `floor(N * ratio)` pairs; train takes the rest.
pub fn split_corpus(pairs: &[DataPair], ratios: SplitRatios, seed: u64) -> Result<CorpusSplit> {
    ratios.validate()?;
    if pairs.is_empty() {
        return Err(invalid("cannot split an empty corpus"));
    }
    let n = pairs.len();
    // The epsilon absorbs representation error, e.g. 100 * 0.19.
    let n_test = libm::floor(n as f64 * ratios.test + 1e-9) as usize;
    let n_dev = libm::floor(n as f64 * ratios.dev + 1e-9) as usize;
    let n_train = n - n_test - n_dev;
    let mut shuffled = pairs.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let dev = shuffled.split_off(n_train + n_test);
    let test = shuffled.split_off(n_train);
    Ok(CorpusSplit {
        train: shuffled,
        test,
        dev,
        seed,
    })
}
