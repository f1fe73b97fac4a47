use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::levenshtein::levenshtein_slices;
use super::vocab::Lexicon;

#[derive(Debug, Clone)]
struct Node {
    word: String,
    freq: u64,
    // edge distance -> node index
    children: BTreeMap<usize, usize>,
}

/// Burkhard-Keller tree over lower-case words under Levenshtein distance.
///
/// Every node reached through the edge labelled `k` of node `a` is at
/// distance exactly `k` from `a`. Nodes live in an arena; index 0 is the
/// root, i.e. the first word inserted.
#[derive(Debug, Clone, Default)]
pub struct BkTree {
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BkMatch<'a> {
    pub word: &'a str,
    pub distance: usize,
    pub freq: u64,
}

impl BkMatch<'_> {
    /// Smaller distance first, then higher frequency, then lexicographic.
    pub fn rank_cmp(&self, other: &BkMatch<'_>) -> Ordering {
        self.distance
            .cmp(&other.distance)
            .then(other.freq.cmp(&self.freq))
            .then(self.word.cmp(other.word))
    }
}

impl BkTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts the lexicon in its (sorted) order.
    pub fn from_lexicon(lexicon: &Lexicon) -> Self {
        let mut tree = Self::new();
        for (w, f) in lexicon.entries() {
            tree.insert(w, *f);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Adds `word` (lower-cased). Returns `false` and leaves the tree
    /// untouched when the word is already present.
    pub fn insert(&mut self, word: &str, freq: u64) -> bool {
        let word = word.to_ascii_lowercase();
        if self.nodes.is_empty() {
            self.nodes.push(Node {
                word,
                freq,
                children: BTreeMap::new(),
            });
            return true;
        }
        let mut cur = 0;
        loop {
            let d = levenshtein_slices(self.nodes[cur].word.as_bytes(), word.as_bytes());
            if d == 0 {
                return false;
            }
            match self.nodes[cur].children.get(&d) {
                Some(&next) => cur = next,
                None => {
                    let idx = self.nodes.len();
                    self.nodes.push(Node {
                        word,
                        freq,
                        children: BTreeMap::new(),
                    });
                    self.nodes[cur].children.insert(d, idx);
                    return true;
                }
            }
        }
    }

    pub fn contains(&self, word: &str) -> bool {
        matches!(self.query(word, 0), Some(m) if m.distance == 0)
    }

    /// Best vocabulary entry within `threshold` edits of `word`.
    ///
    /// Subtrees under edge `k` of a node at distance `d` are skipped when
    /// `|k - d|` exceeds the current bound. Ties at the same distance are
    /// explored so the result equals a linear scan ranked by
    /// [`BkMatch::rank_cmp`].
    pub fn query(&self, word: &str, threshold: usize) -> Option<BkMatch<'_>> {
        if self.nodes.is_empty() {
            return None;
        }
        let word = word.to_ascii_lowercase();
        let mut best: Option<BkMatch<'_>> = None;
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx];
            let d = levenshtein_slices(node.word.as_bytes(), word.as_bytes());
            let bound = best.map_or(threshold, |b| b.distance);
            if d <= bound {
                let cand = BkMatch {
                    word: &node.word,
                    distance: d,
                    freq: node.freq,
                };
                if best.map_or(true, |b| cand.rank_cmp(&b) == Ordering::Less) {
                    best = Some(cand);
                }
            }
            let bound = best.map_or(threshold, |b| b.distance);
            let lo = d.saturating_sub(bound);
            let hi = d + bound;
            stack.extend(node.children.range(lo..=hi).map(|(_, &c)| c));
        }
        best
    }

    /// All stored words with their frequencies, in insertion order.
    pub fn words(&self) -> impl Iterator<Item = (&str, u64)> {
        self.nodes.iter().map(|n| (n.word.as_str(), n.freq))
    }

    #[cfg(test)]
    pub(crate) fn check_edges(&self) -> bool {
        self.nodes.iter().all(|n| {
            n.children.iter().all(|(&k, &c)| {
                levenshtein_slices(n.word.as_bytes(), self.nodes[c].word.as_bytes()) == k
            })
        })
    }

    #[cfg(test)]
    pub(crate) fn child_under(&self, parent: &str, edge: usize) -> Option<&str> {
        let p = self.nodes.iter().find(|n| n.word == parent)?;
        p.children.get(&edge).map(|&c| self.nodes[c].word.as_str())
    }
}

/// Reference ranking by exhaustive scan; used by tests as the oracle.
pub fn linear_scan<'a>(
    entries: &'a [(String, u64)],
    word: &str,
    threshold: usize,
) -> Option<BkMatch<'a>> {
    let word = word.to_ascii_lowercase();
    entries
        .iter()
        .map(|(w, f)| BkMatch {
            word: w,
            distance: levenshtein_slices(w.as_bytes(), word.as_bytes()),
            freq: *f,
        })
        .filter(|m| m.distance <= threshold)
        .min_by(|a, b| a.rank_cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tree(words: &[&str]) -> BkTree {
        let mut t = BkTree::new();
        for w in words {
            t.insert(w, 1);
        }
        t
    }

    #[test]
    fn first_insert_is_root() {
        let t = tree(&["methyl"]);
        assert_eq!(t.words().next(), Some(("methyl", 1)));
    }

    #[test]
    fn figure_four_edges() {
        let t = tree(&["methyl", "dimethyl", "diethyl", "methan"]);
        assert_eq!(t.child_under("methyl", 2), Some("dimethyl"));
        // diethyl and methan also sit at distance 2 from methyl, so they
        // hang below dimethyl.
        assert!(t.check_edges());
        assert_eq!(t.len(), 4);
    }

    #[test]
    fn duplicate_insert_is_noop() {
        let mut t = tree(&["methyl", "ethyl"]);
        assert!(!t.insert("ethyl", 9));
        assert!(!t.insert("ETHYL", 9));
        assert_eq!(t.len(), 2);
        assert_eq!(t.query("ethyl", 1).unwrap().freq, 1);
    }

    #[test]
    fn queries() {
        let t = tree(&["benzoyl", "chloride"]);
        let m = t.query("benzoil", 1).unwrap();
        assert_eq!((m.word, m.distance), ("benzoyl", 1));
        assert_eq!(t.query("chloride", 1).unwrap().distance, 0);
        assert!(t.query("zzzz", 1).is_none());
        assert!(BkTree::new().query("a", 3).is_none());
    }

    #[test]
    fn ties_prefer_frequency_then_lexicographic() {
        let mut t = BkTree::new();
        t.insert("cat", 1);
        t.insert("bat", 5);
        t.insert("hat", 5);
        assert_eq!(t.query("xat", 1).unwrap().word, "bat");
        let mut t = BkTree::new();
        t.insert("hat", 9);
        t.insert("bat", 5);
        assert_eq!(t.query("xat", 1).unwrap().word, "hat");
    }

    #[test]
    fn query_is_case_insensitive() {
        let t = tree(&["benzoyl"]);
        assert_eq!(t.query("BENZOIL", 1).unwrap().word, "benzoyl");
        assert!(t.contains("Benzoyl"));
    }

    #[test]
    fn matches_linear_scan_on_random_vocab() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut entries: Vec<(String, u64)> = (0..300)
            .map(|_| {
                let len = rng.gen_range(1..=8);
                let w: String = (0..len).map(|_| rng.gen_range(b'a'..=b'e') as char).collect();
                (w, rng.gen_range(1..4))
            })
            .collect();
        entries.sort();
        entries.dedup_by(|a, b| a.0 == b.0);
        let t = BkTree::from_lexicon(&Lexicon::from_entries(entries.iter().map(|(w, f)| (w, *f))));
        assert!(t.check_edges());
        for _ in 0..300 {
            let len = rng.gen_range(1..=9);
            let q: String = (0..len).map(|_| rng.gen_range(b'a'..=b'f') as char).collect();
            for th in 1..=3 {
                assert_eq!(t.query(&q, th), linear_scan(&entries, &q, th), "{q} {th}");
            }
        }
    }

    proptest! {
        #[test]
        fn word_set_preserved(words in proptest::collection::vec("[a-c]{1,6}", 0..40)) {
            let mut t = BkTree::new();
            for w in &words {
                t.insert(w, 1);
            }
            let mut got: Vec<String> = t.words().map(|(w, _)| w.to_string()).collect();
            got.sort();
            let mut want = words.clone();
            want.sort();
            want.dedup();
            prop_assert_eq!(got, want);
            prop_assert!(t.check_edges());
        }

        #[test]
        fn raising_threshold_keeps_closer_match(
            words in proptest::collection::vec("[a-c]{1,6}", 1..30),
            q in "[a-d]{1,6}",
        ) {
            let t = tree(&words.iter().map(String::as_str).collect::<Vec<_>>());
            for th in 1..4 {
                if let Some(m) = t.query(&q, th) {
                    let wider = t.query(&q, th + 1).unwrap();
                    prop_assert!(wider.distance <= m.distance);
                    prop_assert_eq!(wider, m);
                }
            }
        }
    }
}
