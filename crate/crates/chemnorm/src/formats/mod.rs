//! On-disk formats.

pub mod attention;
pub mod checkpoint;
pub mod merges;
pub mod pairs;
pub mod vocab;

pub use attention::write_attention_csv;
pub use checkpoint::{decode_checkpoint, encode_checkpoint, Dtype};
pub use merges::{format_merges, parse_merges};
pub use pairs::{load_names, load_pairs, load_split, save_pairs, save_split};
pub use vocab::{format_lexicon, parse_lexicon};
