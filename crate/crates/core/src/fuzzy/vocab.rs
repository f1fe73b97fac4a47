use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::split::split_name;
use crate::error::{invalid, Result};

/// Frequency cutoff for keeping a non-systematic elemental word.
pub const DEFAULT_MIN_COUNT: usize = 5;

/// Elemental vocabulary built from both sides of a parallel corpus.
///
/// Words are stored lower-cased with their corpus frequency. The two sets
/// are disjoint: a non-systematic word that also occurs in a systematic
/// name belongs to the systematic set only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionVocabulary {
    pub systematic_words: BTreeMap<String, u64>,
    pub nonsystematic_words: BTreeMap<String, u64>,
    pub min_count: usize,
}

impl CorrectionVocabulary {
    pub fn len(&self) -> usize {
        self.systematic_words.len() + self.nonsystematic_words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The combined vocabulary, sorted by word.
    pub fn lexicon(&self) -> Lexicon {
        let mut entries: Vec<(String, u64)> = self
            .systematic_words
            .iter()
            .chain(self.nonsystematic_words.iter())
            .map(|(w, &f)| (w.clone(), f))
            .collect();
        entries.sort();
        Lexicon { entries }
    }
}

/// Flat (word, frequency) list, sorted and deduplicated by word.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lexicon {
    entries: Vec<(String, u64)>,
}

impl Lexicon {
    /// Words are lower-cased; repeated words keep the largest frequency.
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: AsRef<str>,
    {
        let mut map: BTreeMap<String, u64> = BTreeMap::new();
        for (w, f) in entries {
            let e = map.entry(w.as_ref().to_ascii_lowercase()).or_insert(0);
            *e = (*e).max(f);
        }
        Self {
            entries: map.into_iter().collect(),
        }
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn count_words<S: AsRef<str>>(names: &[S]) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for name in names {
        for w in split_name(name.as_ref()).words() {
            *counts.entry(w.as_str().to_ascii_lowercase()).or_insert(0) += 1;
        }
    }
    counts
}

pub fn build_vocabulary<S: AsRef<str>>(
    systematic_names: &[S],
    nonsystematic_names: &[S],
    min_count: usize,
) -> Result<CorrectionVocabulary> {
    if min_count == 0 {
        return Err(invalid("min_count must be at least 1"));
    }
    let nonsys_counts = count_words(nonsystematic_names);
    let mut systematic_words = count_words(systematic_names);
    // Tie-breaking prefers frequent words, so fold in sightings from the
    // non-systematic side as well.
    for (w, f) in systematic_words.iter_mut() {
        *f += nonsys_counts.get(w).copied().unwrap_or(0);
    }
    let nonsystematic_words = nonsys_counts
        .into_iter()
        .filter(|(w, f)| *f >= min_count as u64 && !systematic_words.contains_key(w))
        .collect();
    Ok(CorrectionVocabulary {
        systematic_words,
        nonsystematic_words,
        min_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn keys(m: &BTreeMap<String, u64>) -> Vec<&str> {
        m.keys().map(String::as_str).collect()
    }

    #[test]
    fn systematic_only() {
        let v = build_vocabulary(&["benzoyl chloride"], &[], 3).unwrap();
        assert_eq!(keys(&v.systematic_words), ["benzoyl", "chloride"]);
        assert!(v.nonsystematic_words.is_empty());
    }

    #[test]
    fn frequent_nonsystematic_words_survive() {
        let mut nonsys = vec!["benzoil"; 7];
        nonsys.extend(vec!["benzoyl"; 3]);
        nonsys.push("rareword");
        let v = build_vocabulary(&["benzoyl"], &nonsys, 5).unwrap();
        assert_eq!(keys(&v.nonsystematic_words), ["benzoil"]);
        assert_eq!(v.nonsystematic_words["benzoil"], 7);
        // 1 systematic sighting + 3 non-systematic ones.
        assert_eq!(v.systematic_words["benzoyl"], 4);
    }

    #[test]
    fn empty_corpora() {
        let empty: [&str; 0] = [];
        let v = build_vocabulary(&empty, &empty, 5).unwrap();
        assert!(v.is_empty());
        assert!(v.lexicon().is_empty());
    }

    #[test]
    fn zero_min_count_rejected() {
        assert!(build_vocabulary(&["a"], &["b"], 0).is_err());
    }

    #[test]
    fn words_are_lowercased_and_disjoint() {
        let v = build_vocabulary(&["Benzoyl Chloride"], &["BENZOYL x", "benzoyl"], 1).unwrap();
        assert_eq!(keys(&v.systematic_words), ["benzoyl", "chloride"]);
        assert_eq!(keys(&v.nonsystematic_words), ["x"]);
        let lex = v.lexicon();
        let words: Vec<&str> = lex.entries().iter().map(|(w, _)| w.as_str()).collect();
        assert_eq!(words, ["benzoyl", "chloride", "x"]);
    }

    #[test]
    fn lexicon_from_entries_dedupes() {
        let lex = Lexicon::from_entries([("b", 1), ("A", 3), ("a", 2)]);
        assert_eq!(lex.entries(), &[("a".into(), 3), ("b".into(), 1)]);
    }
}
