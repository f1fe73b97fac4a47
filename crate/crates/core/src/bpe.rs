//! Byte-pair-encoding subword tokenizer.
//!
//! Training starts from single characters and repeatedly merges the most
//! frequent adjacent symbol pair, counted over every whitespace-delimited
//! word of every name. Tokenized output marks word-internal tokens with the
//! `@@` suffix, so `4-bromo-6-methoxyquinaldine` can come out as
//! `4-bromo@@ -6-methoxy@@ quinaldine`.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::error::{invalid, Result};

/// Suffix carried by every token that does not end its word.
pub const CONTINUATION: &str = "@@";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolPair {
    pub left: String,
    pub right: String,
}

impl SymbolPair {
    pub fn new(left: impl Into<String>, right: impl Into<String>) -> Result<Self> {
        let (left, right) = (left.into(), right.into());
        if left.is_empty() || right.is_empty() {
            return Err(invalid("merge symbols must be non-empty"));
        }
        if left.chars().chain(right.chars()).any(char::is_whitespace) {
            return Err(invalid("merge symbols must not contain whitespace"));
        }
        Ok(Self { left, right })
    }

    pub fn merged(&self) -> String {
        let mut s = String::with_capacity(self.left.len() + self.right.len());
        s.push_str(&self.left);
        s.push_str(&self.right);
        s
    }
}

/// Ordered merge list plus the lookup structures used when applying it.
#[derive(Debug, Clone)]
pub struct MergeTable {
    merges: Vec<SymbolPair>,
    base_chars: BTreeSet<char>,
    // symbol string -> id, and (left id, right id) -> (rank, merged id)
    symbol_ids: BTreeMap<String, u32>,
    ranks: BTreeMap<(u32, u32), (usize, u32)>,
}

impl PartialEq for MergeTable {
    fn eq(&self, other: &Self) -> bool {
        self.merges == other.merges && self.base_chars == other.base_chars
    }
}

impl Eq for MergeTable {}

impl MergeTable {
    /// Builds a table from its parts. Duplicate merge pairs are rejected.
    /// Characters appearing in merges are added to the base set.
    pub fn new(base_chars: BTreeSet<char>, merges: Vec<SymbolPair>) -> Result<Self> {
        let mut base_chars = base_chars;
        for m in &merges {
            base_chars.extend(m.left.chars().chain(m.right.chars()));
        }
        if base_chars.iter().any(|c| c.is_whitespace()) {
            return Err(invalid("base characters must not be whitespace"));
        }
        let mut symbol_ids = BTreeMap::new();
        let mut intern = |s: String| -> u32 {
            let next = symbol_ids.len() as u32;
            *symbol_ids.entry(s).or_insert(next)
        };
        for c in &base_chars {
            intern(String::from(*c));
        }
        let mut ranks = BTreeMap::new();
        for (rank, m) in merges.iter().enumerate() {
            let l = intern(m.left.clone());
            let r = intern(m.right.clone());
            let out = intern(m.merged());
            if ranks.insert((l, r), (rank, out)).is_some() {
                return Err(invalid("duplicate merge pair"));
            }
        }
        Ok(Self {
            merges,
            base_chars,
            symbol_ids,
            ranks,
        })
    }

    pub fn empty() -> Self {
        Self {
            merges: Vec::new(),
            base_chars: BTreeSet::new(),
            symbol_ids: BTreeMap::new(),
            ranks: BTreeMap::new(),
        }
    }

    pub fn merges(&self) -> &[SymbolPair] {
        &self.merges
    }

    pub fn base_chars(&self) -> &BTreeSet<char> {
        &self.base_chars
    }

    /// Base symbols followed by one symbol per merge, training order.
    /// Always `base_chars().len() + merges().len()` entries.
    pub fn symbols(&self) -> Vec<String> {
        self.base_chars
            .iter()
            .map(|c| String::from(*c))
            .chain(self.merges.iter().map(SymbolPair::merged))
            .collect()
    }

    /// Keeps the first `n` merges.
    pub fn truncated(&self, n: usize) -> Self {
        let n = n.min(self.merges.len());
        Self::new(self.base_chars.clone(), self.merges[..n].to_vec())
            .expect("prefix of a valid table is valid")
    }

    fn id(&self, s: &str) -> Option<u32> {
        self.symbol_ids.get(s).copied()
    }
}

/// Model vocabulary for a merge table: every symbol in its word-final form
/// and its `@@` continuation form, base characters (sorted) first, then
/// merged symbols in training order. Strings already listed are skipped.
pub fn symbol_vocab(table: &MergeTable) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for s in table.symbols() {
        let marked = alloc::format!("{s}{CONTINUATION}");
        for v in [s, marked] {
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
    }
    out
}

/// Subword tokens of one name; word-internal tokens end in `@@`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenizedName {
    pub tokens: Vec<String>,
}

impl TokenizedName {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn to_line(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn from_line(line: &str) -> Self {
        Self {
            tokens: line.split_whitespace().map(String::from).collect(),
        }
    }
}

#[derive(PartialEq, Eq)]
struct HeapEntry {
    count: u64,
    left: String,
    right: String,
    pair: (u32, u32),
}

impl Ord for HeapEntry {
    // Max-heap on count; among equal counts the lexicographically smallest
    // (left, right) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| Reverse((&self.left, &self.right)).cmp(&Reverse((&other.left, &other.right))))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Trainer {
    symbols: Vec<String>,
    words: Vec<(Vec<u32>, u64)>,
    pair_counts: BTreeMap<(u32, u32), u64>,
    pair_words: BTreeMap<(u32, u32), BTreeSet<usize>>,
}

impl Trainer {
    fn entry(&self, pair: (u32, u32)) -> HeapEntry {
        HeapEntry {
            count: self.pair_counts.get(&pair).copied().unwrap_or(0),
            left: self.symbols[pair.0 as usize].clone(),
            right: self.symbols[pair.1 as usize].clone(),
            pair,
        }
    }

    fn add_word_pairs(&mut self, w: usize, sign_add: bool, touched: &mut BTreeSet<(u32, u32)>) {
        let (syms, freq) = &self.words[w];
        for p in syms.windows(2) {
            let key = (p[0], p[1]);
            let c = self.pair_counts.entry(key).or_insert(0);
            if sign_add {
                *c += freq;
                self.pair_words.entry(key).or_default().insert(w);
            } else {
                *c -= freq;
            }
            touched.insert(key);
        }
    }
}

/// Learns up to `num_merges` merges from `corpus`.
///
/// Pairs are counted at every adjacent position inside whitespace-delimited
/// words, weighted by how often each word occurs. The best pair is the one
/// with the highest count, ties going to the smaller `(left, right)`.
/// Training stops early once no pair occurs at least twice.
pub fn train_bpe<S: AsRef<str>>(corpus: &[S], num_merges: usize) -> Result<MergeTable> {
    if num_merges > 0 && corpus.is_empty() {
        return Err(invalid("cannot train BPE merges on an empty corpus"));
    }
    let mut base_chars = BTreeSet::new();
    let mut word_freq: BTreeMap<&str, u64> = BTreeMap::new();
    for name in corpus {
        for w in name.as_ref().split_whitespace() {
            *word_freq.entry(w).or_insert(0) += 1;
            base_chars.extend(w.chars());
        }
    }
    if num_merges == 0 {
        return MergeTable::new(base_chars, Vec::new());
    }

    let symbols: Vec<String> = base_chars.iter().map(|c| String::from(*c)).collect();
    let char_id: BTreeMap<char, u32> = base_chars
        .iter()
        .enumerate()
        .map(|(i, c)| (*c, i as u32))
        .collect();
    let words = word_freq
        .iter()
        .map(|(w, f)| (w.chars().map(|c| char_id[&c]).collect(), *f))
        .collect();
    let mut t = Trainer {
        symbols,
        words,
        pair_counts: BTreeMap::new(),
        pair_words: BTreeMap::new(),
    };
    let mut touched = BTreeSet::new();
    for w in 0..t.words.len() {
        t.add_word_pairs(w, true, &mut touched);
    }
    let mut heap: BinaryHeap<HeapEntry> = t.pair_counts.keys().map(|&p| t.entry(p)).collect();

    let mut merges = Vec::new();
    while merges.len() < num_merges {
        let Some(top) = heap.pop() else { break };
        let current = t.pair_counts.get(&top.pair).copied().unwrap_or(0);
        if current != top.count {
            // Stale entry; the fresh count was pushed when it changed.
            continue;
        }
        if current < 2 {
            break;
        }
        let (a, b) = top.pair;
        let new_id = t.symbols.len() as u32;
        t.symbols.push(alloc::format!("{}{}", top.left, top.right));
        merges.push(SymbolPair {
            left: top.left,
            right: top.right,
        });

        let affected = t.pair_words.remove(&top.pair).unwrap_or_default();
        touched.clear();
        for w in affected {
            if !t.words[w].0.windows(2).any(|p| p[0] == a && p[1] == b) {
                continue;
            }
            t.add_word_pairs(w, false, &mut touched);
            let syms = &mut t.words[w].0;
            let mut merged = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && syms[i] == a && syms[i + 1] == b {
                    merged.push(new_id);
                    i += 2;
                } else {
                    merged.push(syms[i]);
                    i += 1;
                }
            }
            *syms = merged;
            t.add_word_pairs(w, true, &mut touched);
        }
        for &p in &touched {
            match t.pair_counts.get(&p) {
                Some(0) => {
                    t.pair_counts.remove(&p);
                    t.pair_words.remove(&p);
                }
                Some(_) => heap.push(t.entry(p)),
                None => {}
            }
        }
    }
    MergeTable::new(base_chars, merges)
}

// A symbol inside a word being tokenized: its interned id (None for symbols
// the table has never seen) and its text.
struct Piece {
    id: Option<u32>,
    text: String,
}

fn segment_word(word: &str, table: &MergeTable) -> Vec<String> {
    let mut pieces: Vec<Piece> = word
        .chars()
        .map(|c| {
            let text = String::from(c);
            Piece {
                id: table.id(&text),
                text,
            }
        })
        .collect();
    // Replaying merges in training order is the same as repeatedly applying
    // the lowest-ranked pair present whose rank is not below the last one
    // applied.
    let mut next_rank = 0;
    loop {
        let best = pieces
            .windows(2)
            .filter_map(|p| match (p[0].id, p[1].id) {
                (Some(l), Some(r)) => table.ranks.get(&(l, r)).copied(),
                _ => None,
            })
            .filter(|&(rank, _)| rank >= next_rank)
            .min();
        let Some((rank, out)) = best else { break };
        let pair = &table.merges[rank];
        let (l, r) = (table.id(&pair.left), table.id(&pair.right));
        let mut merged: Vec<Piece> = Vec::with_capacity(pieces.len());
        let mut it = pieces.into_iter().peekable();
        while let Some(p) = it.next() {
            if p.id.is_some() && p.id == l && it.peek().is_some_and(|q| q.id.is_some() && q.id == r) {
                let q = it.next().expect("peeked");
                let mut text = p.text;
                text.push_str(&q.text);
                merged.push(Piece { id: Some(out), text });
            } else {
                merged.push(p);
            }
        }
        pieces = merged;
        next_rank = rank + 1;
    }
    pieces.into_iter().map(|p| p.text).collect()
}

/// Tokenizes a name. Whitespace only separates words; runs of whitespace
/// are not preserved (see [`detokenize`]).
pub fn apply_bpe(name: &str, table: &MergeTable) -> TokenizedName {
    let mut tokens = Vec::new();
    for word in name.split_whitespace() {
        let pieces = segment_word(word, table);
        let last = pieces.len() - 1;
        for (i, mut p) in pieces.into_iter().enumerate() {
            if i != last {
                p.push_str(CONTINUATION);
            }
            tokens.push(p);
        }
    }
    TokenizedName { tokens }
}

/// Joins tokens with single spaces, then deletes every `"@@ "`.
///
/// Inverts [`apply_bpe`] for names whose words are separated by single
/// spaces and do not themselves end in `@@`.
pub fn detokenize(tokens: &[String]) -> String {
    let marker = alloc::format!("{CONTINUATION} ");
    let joined = tokens.join(" ");
    let out = joined.replace(&marker, "");
    // A trailing marker (truncated decode) has no following space.
    match out.strip_suffix(CONTINUATION) {
        Some(s) if tokens.last().is_some_and(|t| t.ends_with(CONTINUATION)) => String::from(s),
        _ => out,
    }
}
