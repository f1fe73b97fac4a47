//! Artifact directory: vocabulary, merges and checkpoint files under one
//! `manifest.json` that records their SHA-256 digests and the pipeline
//! configuration they were trained with.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::formats::{decode_checkpoint, encode_checkpoint, format_lexicon, format_merges, parse_lexicon, parse_merges};
use crate::pipeline::PipelineArtifacts;

pub const MANIFEST: &str = "manifest.json";
pub const FORMAT: &str = "chemnorm-artifacts v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub role: String,
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub files: Vec<FileEntry>,
    pub config: PipelineConfig,
}

impl Manifest {
    fn file(&self, role: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.role == role)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes the three artifact files, then the manifest.
pub fn save_artifacts(artifacts: &PipelineArtifacts, cfg: &PipelineConfig, dir: &Path) -> Result<Manifest> {
    cfg.validate().map_err(Error::Usage)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("vocab", &cfg.paths.vocab, format_lexicon(&artifacts.lexicon).into_bytes()),
        ("merges", &cfg.paths.merges, format_merges(&artifacts.merges).into_bytes()),
        ("checkpoint", &cfg.paths.checkpoint, encode_checkpoint(&artifacts.params, cfg.checkpoint_dtype)),
    ];
    let mut entries = Vec::new();
    for (role, name, bytes) in &files {
        write(dir, name, bytes)?;
        entries.push(FileEntry {
            role: role.to_string(),
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
    }
    let manifest = Manifest {
        format: FORMAT.into(),
        files: entries,
        config: cfg.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write(dir, MANIFEST, json.as_bytes())?;
    Ok(manifest)
}

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::artifact(path, "missing manifest"));
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::artifact(&path, e.to_string()))?;
    if manifest.format != FORMAT {
        return Err(Error::artifact(path, format!("unsupported format {:?}", manifest.format)));
    }
    Ok(manifest)
}

fn read_verified(dir: &Path, manifest: &Manifest, role: &str) -> Result<Vec<u8>> {
    let entry = manifest
        .file(role)
        .ok_or_else(|| Error::artifact(dir.join(MANIFEST), format!("no {role} entry")))?;
    if entry.path.contains('/') || entry.path.contains('\\') || entry.path == ".." {
        return Err(Error::artifact(dir.join(MANIFEST), format!("bad {role} path {:?}", entry.path)));
    }
    let path = dir.join(&entry.path);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::artifact(path, format!("missing {role} file")));
        }
        Err(e) => return Err(Error::io(path, e)),
    };
    let actual = sha256_hex(&bytes);
    if actual != entry.sha256 {
        return Err(Error::artifact(
            path,
            format!("checksum mismatch (manifest {}, file {actual})", entry.sha256),
        ));
    }
    Ok(bytes)
}

fn utf8(path: &Path, bytes: Vec<u8>) -> Result<String> {
    String::from_utf8(bytes).map_err(|_| Error::artifact(path, "not UTF-8"))
}

/// Verifies every checksum before parsing anything. Returns the artifacts
/// and the configuration stored in the manifest.
pub fn load_artifacts(dir: &Path) -> Result<(PipelineArtifacts, PipelineConfig)> {
    let manifest = load_manifest(dir)?;
    let vocab = read_verified(dir, &manifest, "vocab")?;
    let merges = read_verified(dir, &manifest, "merges")?;
    let checkpoint = read_verified(dir, &manifest, "checkpoint")?;
    let path = |role: &str| dir.join(&manifest.file(role).expect("verified").path);

    let lexicon = parse_lexicon(&utf8(&path("vocab"), vocab)?).map_err(|m| Error::artifact(path("vocab"), m))?;
    let merges = parse_merges(&utf8(&path("merges"), merges)?).map_err(|m| Error::artifact(path("merges"), m))?;
    let (params, _) = decode_checkpoint(&checkpoint).map_err(|m| Error::artifact(path("checkpoint"), m))?;
    let expected = chemnorm_core::bpe::symbol_vocab(&merges);
    if params.config.vocab.tokens()[chemnorm_core::neural::SPECIALS.len()..] != expected[..] {
        return Err(Error::artifact(path("checkpoint"), "model vocabulary does not match the merges file"));
    }
    Ok((PipelineArtifacts::new(lexicon, merges, params), manifest.config))
}
