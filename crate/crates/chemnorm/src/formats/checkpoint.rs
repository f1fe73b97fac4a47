//! Model checkpoint.
//!
//! A UTF-8 header of `key value` lines,
//!
//! ```text
//! #chemnorm-checkpoint v1
//! dtype f64
//! embed_dim 64
//! hidden_dim 64
//! num_layers 1
//! dropout 0.3
//! tensors 14
//! vocab 212
//! <pad>
//! ...            (one token per line, `vocab` lines)
//! end
//! ```
//!
//! followed by the tensors in [`ModelParams::tensors`] order, each as
//! little-endian `u32` rows, `u32` cols, then `rows * cols` little-endian
//! floats of the declared dtype (`f64` or `f32`). Only `f64` reproduces
//! trained parameters bit for bit.

use std::str::FromStr;

use chemnorm_core::neural::{ModelConfig, ModelParams, Tensor, Vocab};

pub const MAGIC: &str = "#chemnorm-checkpoint v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F32,
    #[default]
    F64,
}

impl Dtype {
    fn name(self) -> &'static str {
        match self {
            Dtype::F32 => "f32",
            Dtype::F64 => "f64",
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

impl FromStr for Dtype {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "f32" => Ok(Dtype::F32),
            "f64" => Ok(Dtype::F64),
            _ => Err(format!("unknown dtype {s:?}")),
        }
    }
}

pub fn encode_checkpoint(params: &ModelParams, dtype: Dtype) -> Vec<u8> {
    let c = &params.config;
    let tensors = params.tensors();
    let mut header = format!(
        "{MAGIC}\ndtype {}\nembed_dim {}\nhidden_dim {}\nnum_layers {}\ndropout {}\ntensors {}\nvocab {}\n",
        dtype.name(),
        c.embed_dim,
        c.hidden_dim,
        c.num_layers,
        c.dropout,
        tensors.len(),
        c.vocab.len()
    );
    for t in c.vocab.tokens() {
        header.push_str(t);
        header.push('\n');
    }
    header.push_str("end\n");
    let mut out = header.into_bytes();
    for t in tensors {
        out.extend_from_slice(&(t.rows as u32).to_le_bytes());
        out.extend_from_slice(&(t.cols as u32).to_le_bytes());
        for &x in &t.data {
            match dtype {
                Dtype::F64 => out.extend_from_slice(&x.to_le_bytes()),
                Dtype::F32 => out.extend_from_slice(&(x as f32).to_le_bytes()),
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Reader<'a> {
    fn line(&mut self) -> Result<&'a str, String> {
        let rest = &self.bytes[self.pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| format!("header line {}: unexpected end of file", self.line + 1))?;
        self.pos += end + 1;
        self.line += 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| format!("header line {}: not UTF-8", self.line))
    }

    fn field<T: FromStr>(&mut self, key: &str) -> Result<T, String> {
        let line = self.line()?;
        let value = line
            .strip_prefix(key)
            .and_then(|v| v.strip_prefix(' '))
            .ok_or_else(|| format!("header line {}: expected {key:?}", self.line))?;
        value
            .parse()
            .map_err(|_| format!("header line {}: bad value for {key}", self.line))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        if self.bytes.len() - self.pos < n {
            return Err("truncated tensor data".into());
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(ModelParams, Dtype), String> {
    let mut r = Reader { bytes, pos: 0, line: 0 };
    if r.line()? != MAGIC {
        return Err(format!("not a checkpoint (expected {MAGIC:?})"));
    }
    let dtype: Dtype = r.field("dtype")?;
    let embed_dim = r.field("embed_dim")?;
    let hidden_dim = r.field("hidden_dim")?;
    let num_layers = r.field("num_layers")?;
    let dropout = r.field("dropout")?;
    let n_tensors: usize = r.field("tensors")?;
    let n_vocab: usize = r.field("vocab")?;
    let mut tokens = Vec::with_capacity(n_vocab);
    for _ in 0..n_vocab {
        tokens.push(r.line()?.to_string());
    }
    if r.line()? != "end" {
        return Err(format!("header line {}: expected \"end\"", r.line));
    }
    let vocab = Vocab::from_tokens(tokens).map_err(|e| e.to_string())?;
    let config = ModelConfig {
        embed_dim,
        hidden_dim,
        num_layers,
        dropout,
        vocab,
    };
    let mut params = ModelParams::zeros(&config).map_err(|e| e.to_string())?;
    let mut tensors = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let rows = r.u32()?;
        let cols = r.u32()?;
        let n = rows.checked_mul(cols).ok_or("tensor shape overflows")?;
        let raw = r.take(n.checked_mul(dtype.width()).ok_or("tensor shape overflows")?)?;
        let data = match dtype {
            Dtype::F64 => raw
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect(),
            Dtype::F32 => raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64)
                .collect(),
        };
        tensors.push(Tensor::from_vec(rows, cols, data).expect("length matches shape"));
    }
    if r.pos != bytes.len() {
        return Err(format!("{} trailing bytes after tensor data", bytes.len() - r.pos));
    }
    params.load_tensors(tensors).map_err(|e| e.to_string())?;
    Ok((params, dtype))
}
