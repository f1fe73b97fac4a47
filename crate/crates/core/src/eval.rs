//! Standardization metrics: exact-match accuracy, corpus BLEU, edit
//! distance histograms and accuracy bucketed by reference length.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fuzzy::levenshtein;

pub const BLEU_MAX_ORDER: usize = 4;

fn check_lengths<A, B>(p: &[A], r: &[B]) -> Result<()> {
    if p.len() != r.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: r.len(),
        });
    }
    Ok(())
}

fn count_matches<S: AsRef<str>, T: AsRef<str>>(predictions: &[S], references: &[T]) -> usize {
    predictions
        .iter()
        .zip(references)
        .filter(|(p, r)| p.as_ref() == r.as_ref())
        .count()
}

/// Fraction of predictions byte-identical to their reference.
pub fn exact_match_accuracy<S: AsRef<str>, T: AsRef<str>>(
    predictions: &[S],
    references: &[T],
) -> Result<f64> {
    check_lengths(predictions, references)?;
    if predictions.is_empty() {
        return Err(crate::error::invalid("accuracy needs at least one example"));
    }
    Ok(count_matches(predictions, references) as f64 / predictions.len() as f64)
}

/// Sufficient statistics for corpus BLEU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BleuStats {
    pub matches: [u64; BLEU_MAX_ORDER],
    pub totals: [u64; BLEU_MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleuScore {
    /// Percentage in [0, 100].
    pub score: f64,
    pub precisions: [f64; BLEU_MAX_ORDER],
    pub brevity_penalty: f64,
    /// Orders with at least one hypothesis n-gram; only these enter the
    /// geometric mean.
    pub effective_order: usize,
    /// Set when some order had n-grams but no matches, forcing 0.
    pub zero_precision: bool,
}

fn ngram_counts<'t, 's>(tokens: &'t [&'s str], n: usize) -> BTreeMap<&'t [&'s str], u64> {
    let mut m = BTreeMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

impl BleuStats {
    pub fn add_sentence(&mut self, hypothesis: &str, reference: &str) {
        let hyp: Vec<&str> = hypothesis.split_whitespace().collect();
        let rf: Vec<&str> = reference.split_whitespace().collect();
        self.hyp_len += hyp.len() as u64;
        self.ref_len += rf.len() as u64;
        for n in 1..=BLEU_MAX_ORDER {
            let h = ngram_counts(&hyp, n);
            let r = ngram_counts(&rf, n);
            for (g, c) in &h {
                self.totals[n - 1] += c;
                self.matches[n - 1] += (*c).min(r.get(g).copied().unwrap_or(0));
            }
        }
    }

    pub fn score(&self) -> BleuScore {
        let mut precisions = [0.0; BLEU_MAX_ORDER];
        let mut log_sum = 0.0;
        let mut effective_order = 0;
        let mut zero_precision = false;
        for n in 0..BLEU_MAX_ORDER {
            if self.totals[n] == 0 {
                continue;
            }
            effective_order += 1;
            precisions[n] = self.matches[n] as f64 / self.totals[n] as f64;
            if self.matches[n] == 0 {
                zero_precision = true;
            } else {
                log_sum += libm::log(precisions[n]);
            }
        }
        let brevity_penalty = if self.hyp_len == 0 {
            0.0
        } else if self.hyp_len >= self.ref_len {
            1.0
        } else {
            libm::exp(1.0 - self.ref_len as f64 / self.hyp_len as f64)
        };
        let score = if effective_order == 0 || zero_precision {
            0.0
        } else {
            100.0 * brevity_penalty * libm::exp(log_sum / effective_order as f64)
        };
        BleuScore {
            score: score.min(100.0),
            precisions,
            brevity_penalty,
            effective_order,
            zero_precision,
        }
    }
}

/// Corpus-level BLEU-4 over whitespace tokens, as a percentage.
///
/// No smoothing: a matched-count of zero at any order with hypothesis
/// n-grams gives 0. Orders for which the corpus has no hypothesis n-grams
/// at all (e.g. bigrams when every name is one token) are left out of the
/// geometric mean.
pub fn bleu<S: AsRef<str>, T: AsRef<str>>(predictions: &[S], references: &[T]) -> Result<BleuScore> {
    check_lengths(predictions, references)?;
    if predictions.is_empty() {
        return Err(crate::error::invalid("BLEU needs at least one example"));
    }
    let mut stats = BleuStats::default();
    for (p, r) in predictions.iter().zip(references) {
        stats.add_sentence(p.as_ref(), r.as_ref());
    }
    Ok(stats.score())
}

/// Counts of `levenshtein(non-systematic, systematic)` over the pairs.
pub fn distance_histogram<'a, I>(pairs: I) -> BTreeMap<usize, usize>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut h = BTreeMap::new();
    for (a, b) in pairs {
        *h.entry(levenshtein(a, b)).or_insert(0) += 1;
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthBucket {
    /// Inclusive lower bound in characters; the bucket is `[lo, lo + width)`.
    pub lo: usize,
    pub correct: usize,
    pub total: usize,
}

impl LengthBucket {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

/// Exact-match accuracy grouped by reference length (in `char`s).
pub fn accuracy_by_length<S: AsRef<str>, T: AsRef<str>>(
    predictions: &[S],
    references: &[T],
    bucket_width: usize,
) -> Result<Vec<LengthBucket>> {
    check_lengths(predictions, references)?;
    if bucket_width == 0 {
        return Err(crate::error::invalid("bucket width must be positive"));
    }
    let mut buckets: BTreeMap<usize, LengthBucket> = BTreeMap::new();
    for (p, r) in predictions.iter().zip(references) {
        let r = r.as_ref();
        let lo = r.chars().count() / bucket_width * bucket_width;
        let b = buckets.entry(lo).or_insert(LengthBucket {
            lo,
            correct: 0,
            total: 0,
        });
        b.total += 1;
        if p.as_ref() == r {
            b.correct += 1;
        }
    }
    Ok(buckets.into_values().collect())
}

/// Headline numbers for a prediction set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_examples: usize,
    pub n_correct: usize,
    pub accuracy: f64,
    pub bleu: BleuScore,
}

impl EvalReport {
    pub fn compute<S: AsRef<str>, T: AsRef<str>>(predictions: &[S], references: &[T]) -> Result<Self> {
        let accuracy = exact_match_accuracy(predictions, references)?;
        Ok(Self {
            n_examples: predictions.len(),
            n_correct: count_matches(predictions, references),
            accuracy,
            bleu: bleu(predictions, references)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn accuracy_fixtures() {
        assert_eq!(exact_match_accuracy(&["a", "b"], &["a", "b"]).unwrap(), 1.0);
        assert_eq!(exact_match_accuracy(&["a", "c"], &["a", "b"]).unwrap(), 0.5);
        assert!(matches!(
            exact_match_accuracy(&["a"], &["a", "b"]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        let empty: [&str; 0] = [];
        assert!(exact_match_accuracy(&empty, &empty).is_err());
    }

    #[test]
    fn bleu_hand_case() {
        // p1..p4 = 4/5, 3/4, 2/3, 1/2; product 1/5; hypothesis longer so BP = 1.
        let b = bleu(&["a b c d e"], &["a b c d"]).unwrap();
        assert_eq!(b.precisions, [0.8, 0.75, 2.0 / 3.0, 0.5]);
        assert_eq!(b.brevity_penalty, 1.0);
        assert!((b.score - 100.0 * libm::pow(0.2, 0.25)).abs() < 1e-9);
        assert!((b.score - 66.87).abs() < 0.01);
    }

    #[test]
    fn bleu_identity_and_disjoint() {
        assert_eq!(bleu(&["x y z w", "q"], &["x y z w", "q"]).unwrap().score, 100.0);
        assert_eq!(bleu(&["benzene"], &["benzene"]).unwrap().score, 100.0);
        let z = bleu(&["a b"], &["c d"]).unwrap();
        assert_eq!(z.score, 0.0);
        assert!(z.zero_precision);
    }

    #[test]
    fn bleu_brevity_penalty() {
        let b = bleu(&["a b"], &["a b c d"]).unwrap();
        assert!((b.brevity_penalty - libm::exp(1.0 - 2.0)).abs() < 1e-12);
        assert_eq!(b.effective_order, 2);
    }

    #[test]
    fn histogram_fixtures() {
        let h = distance_histogram([("benzoil chloride", "benzoyl chloride")]);
        assert_eq!(h, BTreeMap::from([(1, 1)]));
        let h = distance_histogram([("a", "a"), ("bb", "bb")]);
        assert_eq!(h, BTreeMap::from([(0, 2)]));
        assert!(distance_histogram([]).is_empty());
    }

    #[test]
    fn length_buckets() {
        let r = "x".repeat(25);
        let b = accuracy_by_length(&[r.as_str()], &[r.as_str()], 20).unwrap();
        assert_eq!(b, vec![LengthBucket { lo: 20, correct: 1, total: 1 }]);
        assert!(accuracy_by_length(&["a"], &["a"], 0).is_err());
    }

    #[test]
    fn length_buckets_hand_counted() {
        // Reference lengths 3,5,9,10,12,19,20,21,35,4 with width 10:
        // [0,10): 3,5,9,4 -> ok ok no ok = 3/4
        // [10,20): 10,12,19 -> ok no ok = 2/3
        // [20,30): 20,21 -> no ok = 1/2
        // [30,40): 35 -> ok = 1/1
        let lens = [3, 5, 9, 10, 12, 19, 20, 21, 35, 4];
        let ok = [true, true, false, true, false, true, false, true, true, true];
        let refs: Vec<String> = lens.iter().map(|&n| "a".repeat(n)).collect();
        let preds: Vec<String> = refs
            .iter()
            .zip(ok)
            .map(|(r, ok)| if ok { r.clone() } else { "zz".into() })
            .collect();
        let b = accuracy_by_length(&preds, &refs, 10).unwrap();
        let got: Vec<(usize, usize, usize)> = b.iter().map(|b| (b.lo, b.correct, b.total)).collect();
        assert_eq!(got, [(0, 3, 4), (10, 2, 3), (20, 1, 2), (30, 1, 1)]);
    }

    #[test]
    fn report_counts() {
        let r = EvalReport::compute(&["a", "b", "c"], &["a", "x", "c"]).unwrap();
        assert_eq!((r.n_examples, r.n_correct), (3, 2));
        assert!((r.accuracy * 3.0 - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn bleu_bounds_and_permutation(
            pairs in proptest::collection::vec(("[a-c]( [a-c]){0,5}", "[a-c]( [a-c]){0,5}"), 1..12),
            rot in 0usize..12,
        ) {
            let (h, r): (Vec<String>, Vec<String>) = pairs.iter().cloned().unzip();
            let s = bleu(&h, &r).unwrap().score;
            prop_assert!((0.0..=100.0).contains(&s));
            prop_assert!((bleu(&r, &r).unwrap().score - 100.0).abs() < 1e-9);
            let k = rot % h.len();
            let mut h2 = h.clone();
            let mut r2 = r.clone();
            h2.rotate_left(k);
            r2.rotate_left(k);
            prop_assert!((bleu(&h2, &r2).unwrap().score - s).abs() < 1e-9);
            let a = exact_match_accuracy(&h, &r).unwrap();
            prop_assert!((exact_match_accuracy(&h2, &r2).unwrap() - a).abs() < 1e-12);
        }

        #[test]
        fn histogram_mass(pairs in proptest::collection::vec(("[a-c]{0,6}", "[a-c]{0,6}"), 0..20)) {
            let h = distance_histogram(pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())));
            prop_assert_eq!(h.values().sum::<usize>(), pairs.len());
        }
    }
}
