use chemnorm_core::corpus::{
    parse_pairs, split_corpus, synthetic, AugmentationConfig, Augmenter, DataPair, EditKind, DEFAULT_RATIOS,
};
use chemnorm_core::eval::{accuracy_by_length, bleu, distance_histogram, exact_match_accuracy};
use chemnorm_core::fuzzy::levenshtein;
use chemnorm_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pairs(n: usize) -> Vec<DataPair> {
    (0..n).map(|i| DataPair::new(&format!("name {i}"), &format!("sys{i}")).unwrap()).collect()
}

#[test]
fn bleu_examples() {
    let refs = ["a b c", "1,2-dichloroethane"];
    assert!((bleu(&refs, &refs).unwrap().score - 100.0).abs() < 1e-9);
    assert_eq!(bleu(&["x y z"], &["a b c"]).unwrap().score, 0.0);
    let b = bleu(&["a b c d e"], &["a b c d"]).unwrap();
    assert!((b.score - 66.87).abs() < 0.01, "{}", b.score);
    assert_eq!(b.brevity_penalty, 1.0);
    assert!(matches!(bleu(&["a"], &["a", "b"]), Err(Error::LengthMismatch { .. })));
}

#[test]
fn accuracy_examples() {
    assert_eq!(exact_match_accuracy(&["a", "b", "c", "d"], &["a", "x", "c", "y"]).unwrap(), 0.5);
    assert!(exact_match_accuracy(&["a"], &["a", "b"]).is_err());
}

#[test]
fn histogram_examples() {
    let same = [("ethane", "ethane"), ("benzene", "benzene")];
    assert_eq!(distance_histogram(same).into_iter().collect::<Vec<_>>(), [(0, 2)]);
    let h = distance_histogram([("benzoil chloride", "benzoyl chloride")]);
    assert_eq!(h.into_iter().collect::<Vec<_>>(), [(1, 1)]);
    assert!(distance_histogram(std::iter::empty()).is_empty());
}

#[test]
fn length_bucket_examples() {
    let refs = ["benzene", "1,2-dichloroethane", "2-chloro-4-methylpyridine"];
    for b in accuracy_by_length(&refs, &refs, 10).unwrap() {
        assert_eq!(b.accuracy(), 1.0);
    }
    let r = ["x".repeat(25)];
    let b = accuracy_by_length(&r, &r, 20).unwrap();
    assert_eq!((b[0].lo, b[0].total), (20, 1));
}

#[test]
fn parse_examples() {
    let p = parse_pairs("benzoil chloride\tbenzoyl chloride\n").unwrap();
    assert_eq!(p, [DataPair::new("benzoil chloride", "benzoyl chloride").unwrap()]);
    assert_eq!(
        parse_pairs("a\tb\n\nno tab here\n"),
        Err(Error::Parse { line: 3, message: "expected 2 tab-separated fields, found 1".into() })
    );
    assert!(matches!(parse_pairs("a\tb\tc\n"), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn split_examples() {
    let s = split_corpus(&pairs(100), DEFAULT_RATIOS, 3).unwrap();
    assert_eq!((s.train.len(), s.test.len(), s.dev.len()), (80, 19, 1));
    assert_eq!(s, split_corpus(&pairs(100), DEFAULT_RATIOS, 3).unwrap());
    let s = split_corpus(&pairs(7), DEFAULT_RATIOS, 3).unwrap();
    assert_eq!((s.train.len(), s.test.len(), s.dev.len()), (6, 1, 0));
    assert!(split_corpus(&[], DEFAULT_RATIOS, 3).is_err());
}

#[test]
fn augmentation_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let off = Augmenter::new(0.0, "abc".chars()).unwrap();
    assert!((0..100).all(|_| off.augment("benzene", &mut rng).0 == "benzene"));
    let on = Augmenter::new(1.0, "abc".chars()).unwrap();
    for _ in 0..100 {
        let (s, kind) = on.apply("benzene", EditKind::Insert, &mut rng);
        assert_eq!((s.chars().count(), kind), (8, Some(EditKind::Insert)));
    }
    let mut changed = 0;
    let aug = Augmenter::new(0.025, "abcdefghij".chars()).unwrap();
    for _ in 0..100_000 {
        let (s, kind) = aug.augment("chloroethane", &mut rng);
        changed += usize::from(kind.is_some());
        assert!(levenshtein(&s, "chloroethane") <= 2);
    }
    let rate = changed as f64 / 100_000.0;
    assert!((rate - 0.025).abs() <= 0.003, "{rate}");
    assert!(Augmenter::new(1.5, "a".chars()).is_err());
    let _ = AugmentationConfig::default();
}

#[test]
fn synthetic_corpus_is_seeded() {
    let cfg = synthetic::SyntheticConfig { seed: 7, ..Default::default() };
    let a = synthetic::generate(200, &cfg);
    assert_eq!(a, synthetic::generate(200, &cfg));
    assert!(a.iter().any(|p| p.non_systematic != p.systematic));
}

proptest! {
    #[test]
    fn split_partitions(n in 1usize..300, seed in any::<u64>()) {
        let input = pairs(n);
        let s = split_corpus(&input, DEFAULT_RATIOS, seed).unwrap();
        let mut all: Vec<DataPair> = s.train.iter().chain(&s.test).chain(&s.dev).cloned().collect();
        all.sort();
        let mut expected = input.clone();
        expected.sort();
        prop_assert_eq!(all, expected);
        prop_assert_eq!(s.test.len(), (n as f64 * 0.19 + 1e-9).floor() as usize);
        prop_assert_eq!(s.dev.len(), (n as f64 * 0.01 + 1e-9).floor() as usize);
    }

    #[test]
    fn bleu_bounds_and_order(pairs in prop::collection::vec(("[abc]( [abc]){0,5}", "[abc]( [abc]){0,5}"), 1..12), rot in 0usize..12) {
        let hyp: Vec<&str> = pairs.iter().map(|p| p.0.as_str()).collect();
        let refs: Vec<&str> = pairs.iter().map(|p| p.1.as_str()).collect();
        let b = bleu(&hyp, &refs).unwrap().score;
        prop_assert!((0.0..=100.0).contains(&b));
        let k = rot % hyp.len();
        let (mut h2, mut r2) = (hyp.clone(), refs.clone());
        h2.rotate_left(k);
        r2.rotate_left(k);
        prop_assert!((bleu(&h2, &r2).unwrap().score - b).abs() < 1e-9);
        prop_assert!((bleu(&refs, &refs).unwrap().score - 100.0).abs() < 1e-9);
        let acc = exact_match_accuracy(&hyp, &refs).unwrap();
        prop_assert_eq!(exact_match_accuracy(&h2, &r2).unwrap(), acc);
    }

    #[test]
    fn histogram_counts_every_pair(pairs in prop::collection::vec(("[ab]{0,6}", "[ab]{0,6}"), 0..20)) {
        let h = distance_histogram(pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())));
        prop_assert_eq!(h.values().sum::<usize>(), pairs.len());
    }
}
