use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::bktree::BkTree;
use super::split::{split_name, Segment};

/// Words shorter than this pass through untouched; one edit on a one- or
/// two-letter word (element symbols, locant letters) is almost always an
/// overcorrection.
pub const MIN_CORRECTABLE_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replacement {
    pub original: String,
    pub replacement: String,
    pub distance: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionResult {
    pub corrected: String,
    pub replacements: Vec<Replacement>,
}

/// Replaces each out-of-vocabulary elemental word of `name` with its closest
/// vocabulary word within `threshold` edits. Separators are copied verbatim;
/// in-vocabulary words keep their original case. A threshold of 0 disables
/// correction.
pub fn correct_name(name: &str, tree: &BkTree, threshold: usize) -> CorrectionResult {
    let mut corrected = String::with_capacity(name.len());
    let mut replacements = Vec::new();
    for seg in split_name(name).segments {
        match seg {
            Segment::Separator(s) => corrected.push_str(&s),
            Segment::Word(w) => {
                let w = w.as_str();
                let hit = if threshold == 0 || w.len() < MIN_CORRECTABLE_LEN {
                    None
                } else {
                    tree.query(w, threshold)
                };
                match hit {
                    Some(m) if m.distance > 0 => {
                        corrected.push_str(m.word);
                        replacements.push(Replacement {
                            original: w.to_string(),
                            replacement: m.word.to_string(),
                            distance: m.distance,
                        });
                    }
                    _ => corrected.push_str(w),
                }
            }
        }
    }
    CorrectionResult {
        corrected,
        replacements,
    }
}
