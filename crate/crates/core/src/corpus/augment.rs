use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DataPair;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationConfig {
    /// Probability that a name receives one edit.
    pub p_error: f64,
    pub seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            p_error: 0.025,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditKind {
    Insert,
    Delete,
    Exchange,
    Replace,
}

impl EditKind {
    pub const ALL: [EditKind; 4] = [EditKind::Insert, EditKind::Delete, EditKind::Exchange, EditKind::Replace];
}

/// Injects single character-level errors into names.
#[derive(Debug, Clone)]
pub struct Augmenter {
    p_error: f64,
    pool: Vec<char>,
}

impl Augmenter {
    /// `pool` is the set of characters random insertions and replacements
    /// draw from.
    pub fn new(p_error: f64, pool: impl IntoIterator<Item = char>) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_error) {
            return Err(invalid("p_error must lie in [0, 1]"));
        }
        let pool: BTreeSet<char> = pool.into_iter().filter(|c| !c.is_whitespace()).collect();
        Ok(Self {
            p_error,
            pool: pool.into_iter().collect(),
        })
    }

    /// Uses every non-whitespace character of `names` as the pool.
    pub fn from_names<S: AsRef<str>>(p_error: f64, names: &[S]) -> Result<Self> {
        Self::new(p_error, names.iter().flat_map(|n| n.as_ref().chars().collect::<Vec<_>>()))
    }

    /// With probability `p_error` applies one edit, picked uniformly from
    /// the four kinds. Returns the (possibly unchanged) name and the edit.
    pub fn augment<R: Rng + ?Sized>(&self, name: &str, rng: &mut R) -> (String, Option<EditKind>) {
        if self.p_error == 0.0 || !rng.gen_bool(self.p_error) {
            return (String::from(name), None);
        }
        let kind = EditKind::ALL[rng.gen_range(0..4)];
        self.apply(name, kind, rng)
    }

    /// Applies a specific edit. On names shorter than two characters every
    /// kind falls back to an insertion; with an empty pool the name is
    /// returned unchanged.
    pub fn apply<R: Rng + ?Sized>(&self, name: &str, kind: EditKind, rng: &mut R) -> (String, Option<EditKind>) {
        let mut chars: Vec<char> = name.chars().collect();
        let kind = if chars.len() < 2 { EditKind::Insert } else { kind };
        if self.pool.is_empty() && matches!(kind, EditKind::Insert | EditKind::Replace) {
            return (String::from(name), None);
        }
        match kind {
            EditKind::Insert => {
                let pos = rng.gen_range(0..=chars.len());
                chars.insert(pos, self.pool[rng.gen_range(0..self.pool.len())]);
            }
            EditKind::Delete => {
                chars.remove(rng.gen_range(0..chars.len()));
            }
            EditKind::Exchange => {
                let i = rng.gen_range(0..chars.len());
                let mut j = rng.gen_range(0..chars.len() - 1);
                if j >= i {
                    j += 1;
                }
                chars.swap(i, j);
            }
            EditKind::Replace => {
                let pos = rng.gen_range(0..chars.len());
                let current = chars[pos];
                // Draw from the pool minus the current character when possible.
                let others = self.pool.iter().filter(|&&c| c != current).count();
                if others > 0 {
                    let k = rng.gen_range(0..others);
                    chars[pos] = *self.pool.iter().filter(|&&c| c != current).nth(k).expect("k < others");
                }
            }
        }
        (chars.into_iter().collect(), Some(kind))
    }
}

/// Augments the non-systematic side of every pair with a generator seeded
/// from `cfg.seed`. The character pool is taken from the pairs themselves.
pub fn augment_pairs(pairs: &[DataPair], cfg: &AugmentationConfig) -> Result<Vec<DataPair>> {
    let names: Vec<&str> = pairs
        .iter()
        .flat_map(|p| [p.non_systematic.as_str(), p.systematic.as_str()])
        .collect();
    let aug = Augmenter::from_names(cfg.p_error, &names)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(pairs
        .iter()
        .map(|p| {
            let (n, _) = aug.augment(&p.non_systematic, &mut rng);
            // An edit can leave only whitespace behind; keep the original then.
            DataPair::new(&n, &p.systematic).unwrap_or_else(|_| p.clone())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::levenshtein;
    use proptest::prelude::*;

    fn aug(p: f64) -> Augmenter {
        Augmenter::new(p, "abcdefgh-0123".chars()).unwrap()
    }

    #[test]
    fn zero_probability_is_identity() {
        let a = aug(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(a.augment("benzoyl chloride", &mut rng), ("benzoyl chloride".into(), None));
        }
    }

    #[test]
    fn insert_grows_by_one() {
        let a = aug(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let (s, k) = a.apply("methyl", EditKind::Insert, &mut rng);
            assert_eq!(s.chars().count(), 7);
            assert_eq!(k, Some(EditKind::Insert));
        }
    }

    #[test]
    fn short_names_fall_back_to_insert() {
        let a = aug(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in EditKind::ALL {
            let (s, k) = a.apply("x", kind, &mut rng);
            assert_eq!(s.chars().count(), 2);
            assert_eq!(k, Some(EditKind::Insert));
        }
    }

    #[test]
    fn each_kind_has_its_effect() {
        let a = aug(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (s, _) = a.apply("abcdef", EditKind::Delete, &mut rng);
        assert_eq!(s.len(), 5);
        let (s, _) = a.apply("abcdef", EditKind::Replace, &mut rng);
        assert_eq!(levenshtein(&s, "abcdef"), 1);
        let (s, _) = a.apply("abcdef", EditKind::Exchange, &mut rng);
        let mut x: Vec<char> = s.chars().collect();
        x.sort();
        assert_eq!(x.into_iter().collect::<String>(), "abcdef");
        assert_ne!(s, "abcdef");
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(Augmenter::new(1.5, "a".chars()).is_err());
        assert!(Augmenter::new(-0.1, "a".chars()).is_err());
    }

    #[test]
    fn modification_rate_matches_probability() {
        // 100000 Bernoulli(0.025) trials: sd = 0.000494, 3 sd ~ 0.0015.
        let a = aug(0.025);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let hits = (0..n).filter(|_| a.augment("benzoyl", &mut rng).1.is_some()).count();
        let frac = hits as f64 / n as f64;
        assert!((frac - 0.025).abs() <= 0.003, "{frac}");
    }

    #[test]
    fn kinds_are_uniform() {
        let a = aug(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            let k = a.augment("benzoyl", &mut rng).1.unwrap();
            counts[EditKind::ALL.iter().position(|&x| x == k).unwrap()] += 1;
        }
        // Each ~ Binomial(40000, 0.25): sd ~ 86.6.
        assert!(counts.iter().all(|&c| (c as i64 - 10_000).abs() < 400), "{counts:?}");
    }

    #[test]
    fn augment_pairs_is_seeded_and_keeps_targets() {
        let pairs: Vec<DataPair> = (0..200)
            .map(|i| DataPair::new(&alloc::format!("name{i}x"), "target").unwrap())
            .collect();
        let cfg = AugmentationConfig { p_error: 0.5, seed: 9 };
        let a = augment_pairs(&pairs, &cfg).unwrap();
        assert_eq!(a, augment_pairs(&pairs, &cfg).unwrap());
        assert!(a.iter().all(|p| p.systematic == "target"));
        assert!(a.iter().zip(&pairs).any(|(x, y)| x != y));
    }

    proptest! {
        #[test]
        fn edit_distance_at_most_two(name in "[a-h0-3-]{0,20}", seed in any::<u64>()) {
            let a = aug(1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (s, _) = a.augment(&name, &mut rng);
            prop_assert!(levenshtein(&s, &name) <= 2);
        }
    }
}
