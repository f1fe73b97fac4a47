//! Dictionary-based spelling correction over elemental words.
//!
//! A name is split into maximal runs of ASCII letters ("elemental words")
//! and everything else. Words are looked up in a BK-tree built from the
//! combined systematic / frequent non-systematic vocabulary, and replaced by
//! the closest entry within a Levenshtein threshold.

mod bktree;
mod correct;
mod levenshtein;
mod split;
mod vocab;

pub use bktree::{linear_scan, BkMatch, BkTree};
pub use correct::{correct_name, CorrectionResult, Replacement, MIN_CORRECTABLE_LEN};
pub use levenshtein::{levenshtein, levenshtein_slices};
pub use split::{split_name, ElementalWord, Segment, SplitName};
pub use vocab::{build_vocabulary, CorrectionVocabulary, Lexicon, DEFAULT_MIN_COUNT};
