use std::collections::BTreeSet;

use ner_core::corpus::{
    corpus_stats, kfold_indices, parse_conll, repair_bio, serialize_conll, split_holdout, validate_bio, Corpus, Label, Sentence,
};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = Label> {
    (0..Label::SCHEME.len()).prop_map(|i| Label::SCHEME[i])
}

fn surface() -> impl Strategy<Value = String> {
    prop_oneof!["[a-z]{1,6}", "[\u{0626}-\u{064A}]{1,5}", "[0-9]{1,4}", Just(".".to_string()), Just("،".to_string())]
}

fn corpus() -> impl Strategy<Value = Corpus> {
    prop::collection::vec(prop::collection::vec((surface(), label()), 1..8), 0..8).prop_map(|sents| {
        Corpus::new(
            sents
                .into_iter()
                .map(|pairs| {
                    let pairs: Vec<(String, String)> = pairs.into_iter().map(|(s, t)| (s, t.to_string())).collect();
                    Sentence::from_pairs(&pairs).unwrap()
                })
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(c in corpus()) {
        prop_assert_eq!(parse_conll(&serialize_conll(&c)).unwrap(), c);
    }

    #[test]
    fn repair_leaves_no_violations_and_is_idempotent(c in corpus()) {
        let r = repair_bio(&c);
        prop_assert!(validate_bio(&r).is_empty());
        prop_assert_eq!(repair_bio(&r), r.clone());
        if validate_bio(&c).is_empty() {
            prop_assert_eq!(r, c);
        }
    }

    #[test]
    fn distribution_counts_add_up(c in corpus()) {
        let d = corpus_stats(&c);
        prop_assert_eq!(d.total, c.token_count());
        prop_assert_eq!(d.entity_counts.iter().sum::<usize>() + d.outside, d.total);
        if d.total > 0 {
            let pct: f64 = d.rows().iter().map(|r| r.2).sum();
            prop_assert!((pct - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn folds_partition_the_sentences(n in 1usize..200, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = kfold_indices(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let all: BTreeSet<usize> = folds.iter().flatten().copied().collect();
        prop_assert_eq!(all.len(), n);
        prop_assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), n);
        prop_assert_eq!(kfold_indices(n, k, seed).unwrap(), folds);
    }

    #[test]
    fn holdout_keeps_every_sentence_once(c in corpus(), frac in 0.05f64..0.95, seed in any::<u64>()) {
        prop_assume!(c.len() >= 2);
        let (train, test) = split_holdout(&c, frac, seed).unwrap();
        prop_assert!(!train.is_empty() && !test.is_empty());
        prop_assert_eq!(train.len() + test.len(), c.len());
        let mut seen: Vec<String> = train.sentences().iter().chain(test.sentences()).map(|s| format!("{s:?}")).collect();
        let mut orig: Vec<String> = c.sentences().iter().map(|s| format!("{s:?}")).collect();
        seen.sort();
        orig.sort();
        prop_assert_eq!(seen, orig);
    }
}

#[test]
fn malformed_lines_report_their_line_number() {
    let err = parse_conll("a O\n\nb B-XYZ\n").unwrap_err();
    assert!(err.to_string().contains('3'), "{err}");
    let err = parse_conll("a O\nb\n").unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}
