//! Seeded generator of systematic-like names with non-systematic variants.
//!
//! Systematic names follow a small substitutive pattern,
//! `<locant>-<prefix>[-<locant>-<prefix>]<parent>` with prefixes in
//! alphabetical order (`4-chloro-2-methylpyridine`). The non-systematic side
//! mixes the error types seen in real corpora:
//!
//! * ordering: the inverted index form `pyridine, 4-chloro-2-methyl`
//! * synonyms: alternative parent names (`benzol` for `benzene`)
//! * common names for a few mono-substituted benzenes (`toluene`)
//! * spelling: one random letter edit inside an elemental word

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DataPair;
use crate::fuzzy::{split_name, Segment};

const PREFIXES: &[&str] = &[
    "amino", "bromo", "chloro", "cyano", "ethyl", "fluoro", "hydroxy", "iodo", "methoxy", "methyl",
    "nitro", "propyl",
];

// (systematic parent, synonyms)
const PARENTS: &[(&str, &[&str])] = &[
    ("benzene", &["benzol"]),
    ("pyridine", &["azine"]),
    ("furan", &["furane", "oxole"]),
    ("thiophene", &["thiofuran"]),
    ("naphthalene", &["naphthalin"]),
    ("quinoline", &["chinoline"]),
    ("pyrimidine", &["miazine"]),
    ("benzoxazole", &["benzooxazole"]),
    ("pyrrole", &["azole"]),
    ("indole", &["benzopyrrole"]),
];

const COMMON_BENZENES: &[(&str, &str)] = &[
    ("amino", "aniline"),
    ("hydroxy", "phenol"),
    ("methoxy", "anisole"),
    ("methyl", "toluene"),
    ("nitro", "nitrobenzol"),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Probability that a non-systematic name carries a spelling error.
    pub p_spelling: f64,
    pub p_inverted: f64,
    pub p_synonym: f64,
    /// Probability that a mono-substituted benzene uses its common name.
    pub p_common: f64,
    pub max_substituents: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            p_spelling: 0.4,
            p_inverted: 0.35,
            p_synonym: 0.25,
            p_common: 0.5,
            max_substituents: 2,
        }
    }
}

/// `n` pairs; identical for identical configs.
pub fn generate(n: usize, cfg: &SyntheticConfig) -> Vec<DataPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..n).map(|_| one_pair(cfg, &mut rng)).collect()
}

/// A copy-task corpus: both sides carry the same systematic name.
pub fn generate_copy(n: usize, seed: u64) -> Vec<DataPair> {
    let cfg = SyntheticConfig {
        seed,
        ..SyntheticConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (_, _, sys) = systematic(&cfg, &mut rng);
            DataPair::new(&sys, &sys).expect("generated names are non-empty")
        })
        .collect()
}

fn systematic<R: Rng>(cfg: &SyntheticConfig, rng: &mut R) -> (Vec<(u32, &'static str)>, usize, String) {
    let parent = rng.gen_range(0..PARENTS.len());
    let k = rng.gen_range(1..=cfg.max_substituents.max(1));
    let mut prefixes: Vec<&str> = PREFIXES.choose_multiple(rng, k).copied().collect();
    prefixes.sort_unstable();
    let mut locants: Vec<u32> = (1..=6).collect();
    locants.shuffle(rng);
    let subs: Vec<(u32, &str)> = locants.into_iter().zip(prefixes).collect();
    let name = format!("{}{}", render_subs(&subs), PARENTS[parent].0);
    (subs, parent, name)
}

fn render_subs(subs: &[(u32, &str)]) -> String {
    let parts: Vec<String> = subs.iter().map(|(l, p)| format!("{l}-{p}")).collect();
    parts.join("-")
}

fn one_pair<R: Rng>(cfg: &SyntheticConfig, rng: &mut R) -> DataPair {
    let (subs, parent, sys) = systematic(cfg, rng);
    let (parent_name, synonyms) = PARENTS[parent];

    let common = (parent_name == "benzene" && subs.len() == 1)
        .then(|| COMMON_BENZENES.iter().find(|(p, _)| *p == subs[0].1))
        .flatten();
    let mut non = if let (Some((_, common)), true) = (common, rng.gen_bool(cfg.p_common)) {
        String::from(*common)
    } else {
        let parent_form = if rng.gen_bool(cfg.p_synonym) {
            *synonyms.choose(rng).expect("every parent has a synonym")
        } else {
            parent_name
        };
        if rng.gen_bool(cfg.p_inverted) {
            format!("{parent_form}, {}", render_subs(&subs))
        } else {
            format!("{}{parent_form}", render_subs(&subs))
        }
    };
    if rng.gen_bool(cfg.p_spelling) {
        non = misspell(&non, rng);
    }
    DataPair::new(&non, &sys).expect("generated names are non-empty")
}

/// One letter-level insertion, deletion or substitution inside a random
/// elemental word of at least four letters.
pub fn misspell<R: Rng + ?Sized>(name: &str, rng: &mut R) -> String {
    let segments = split_name(name).segments;
    let candidates: Vec<usize> = segments
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s, Segment::Word(w) if w.as_str().len() >= 4))
        .map(|(i, _)| i)
        .collect();
    let Some(&target) = candidates.choose(rng) else {
        return String::from(name);
    };
    let mut out = String::with_capacity(name.len() + 1);
    for (i, seg) in segments.iter().enumerate() {
        if i != target {
            out.push_str(seg.text());
            continue;
        }
        let mut w: Vec<u8> = seg.text().as_bytes().to_vec();
        let letter = |rng: &mut R| rng.gen_range(b'a'..=b'z');
        match rng.gen_range(0..3) {
            0 => {
                let pos = rng.gen_range(0..=w.len());
                w.insert(pos, letter(rng));
            }
            1 => {
                w.remove(rng.gen_range(0..w.len()));
            }
            _ => {
                let pos = rng.gen_range(0..w.len());
                let mut c = letter(rng);
                while c == w[pos] {
                    c = letter(rng);
                }
                w[pos] = c;
            }
        }
        out.push_str(core::str::from_utf8(&w).expect("ascii"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::levenshtein;

    #[test]
    fn deterministic() {
        let cfg = SyntheticConfig { seed: 5, ..Default::default() };
        assert_eq!(generate(100, &cfg), generate(100, &cfg));
        let other = SyntheticConfig { seed: 6, ..cfg };
        assert_ne!(generate(100, &cfg), generate(100, &other));
    }

    #[test]
    fn systematic_side_is_clean() {
        let cfg = SyntheticConfig::default();
        for p in generate(500, &cfg) {
            assert!(p.systematic.chars().next().unwrap().is_ascii_digit(), "{}", p.systematic);
            assert!(!p.systematic.contains(' '));
            assert!(PARENTS.iter().any(|(n, _)| p.systematic.ends_with(n)));
        }
    }

    #[test]
    fn noise_mix_is_present() {
        let pairs = generate(2000, &SyntheticConfig::default());
        let inverted = pairs.iter().filter(|p| p.non_systematic.contains(", ")).count();
        let same = pairs.iter().filter(|p| p.non_systematic == p.systematic).count();
        assert!(inverted > 300, "{inverted}");
        assert!(same > 200, "{same}");
    }

    #[test]
    fn misspell_is_one_edit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let s = misspell("2-chloro-4-methylpyridine", &mut rng);
            assert_eq!(levenshtein(&s, "2-chloro-4-methylpyridine"), 1);
        }
        assert_eq!(misspell("1-H", &mut rng), "1-H");
    }

    #[test]
    fn copy_corpus() {
        let c = generate_copy(50, 3);
        assert_eq!(c.len(), 50);
        assert!(c.iter().all(|p| p.non_systematic == p.systematic));
    }
}
