use std::fs;
use std::path::Path;

use chemnorm_core::corpus::{parse_pairs, CorpusSplit, DataPair, SplitRatios};
use chemnorm_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a `non-systematic<TAB>systematic` corpus file.
pub fn load_pairs(path: &Path) -> Result<Vec<DataPair>> {
    let text = read_text(path)?;
    parse_pairs(&text).map_err(|e| match e {
        CoreError::Parse { line, message } => Error::data(path, format!("line {line}: {message}")),
        other => Error::data(path, other.to_string()),
    })
}

pub fn format_pairs(pairs: &[DataPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        out.push_str(&p.non_systematic);
        out.push('\t');
        out.push_str(&p.systematic);
        out.push('\n');
    }
    out
}

pub fn save_pairs(path: &Path, pairs: &[DataPair]) -> Result<()> {
    write_text(path, &format_pairs(pairs))
}

/// One name per line; blank lines are skipped.
pub fn load_names(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub train: usize,
    pub test: usize,
    pub dev: usize,
}

pub const TRAIN_FILE: &str = "train.tsv";
pub const TEST_FILE: &str = "test.tsv";
pub const DEV_FILE: &str = "dev.tsv";
pub const SPLIT_MANIFEST: &str = "split.json";

/// Writes `train.tsv`, `test.tsv`, `dev.tsv` and `split.json` into `dir`.
pub fn save_split(dir: &Path, split: &CorpusSplit, ratios: SplitRatios) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_pairs(&dir.join(TRAIN_FILE), &split.train)?;
    save_pairs(&dir.join(TEST_FILE), &split.test)?;
    save_pairs(&dir.join(DEV_FILE), &split.dev)?;
    let manifest = SplitManifest {
        seed: split.seed,
        ratios: [ratios.train, ratios.test, ratios.dev],
        train: split.train.len(),
        test: split.test.len(),
        dev: split.dev.len(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_text(&dir.join(SPLIT_MANIFEST), &(json + "\n"))
}

pub fn load_split(dir: &Path) -> Result<CorpusSplit> {
    let path = dir.join(SPLIT_MANIFEST);
    let manifest: SplitManifest =
        serde_json::from_str(&read_text(&path)?).map_err(|e| Error::data(&path, e.to_string()))?;
    let split = CorpusSplit {
        train: load_pairs(&dir.join(TRAIN_FILE))?,
        test: load_pairs(&dir.join(TEST_FILE))?,
        dev: load_pairs(&dir.join(DEV_FILE))?,
        seed: manifest.seed,
    };
    if (split.train.len(), split.test.len(), split.dev.len()) != (manifest.train, manifest.test, manifest.dev) {
        return Err(Error::data(&path, "split sizes disagree with the manifest"));
    }
    Ok(split)
}
