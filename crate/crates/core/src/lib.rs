//! Chemical name standardization core.
//!
//! Three stages turn a non-systematic compound name into a systematic one:
//!
//! 1. [`fuzzy`]: split a name into elemental words and snap misspelled words
//!    onto a vocabulary with a BK-tree over Levenshtein distance.
//! 2. [`bpe`]: byte-pair-encoding subword tokenization with `@@`
//!    continuation markers.
//! 3. [`neural`]: a bidirectional-LSTM encoder and an attentional LSTM
//!    decoder, trained with SGD and decoded with beam search.
//!
//! [`eval`] and [`corpus`] carry the metrics and the data layer. The crate is
//! `no_std` and only needs `alloc`; file formats and the CLI live in the
//! `chemnorm` crate.
#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod bpe;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod fuzzy;
pub mod neural;

pub use error::{Error, Result};
