use ner_core::corpus::Label;
use ner_core::eval::{cohen_kappa, cross_validate, f1, paired_ttest, tag_metrics};
use ner_core::synthetic;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn f1_matches_reference_rows() {
    assert!((f1(0.8466, 0.8049) - 0.8252).abs() < 1e-4);
    assert!((f1(0.8190, 0.7505) - 0.7833).abs() < 1e-4);
    assert!((f1(0.8510, 0.7852) - 0.8168).abs() < 1e-4);
}

#[test]
fn kappa_of_independent_annotators_is_near_zero() {
    let mut rng = StdRng::seed_from_u64(7);
    let mut draw = || Label::SCHEME[rng.random_range(0..Label::SCHEME.len())];
    let a: Vec<Label> = (0..10_000).map(|_| draw()).collect();
    let b: Vec<Label> = (0..10_000).map(|_| draw()).collect();
    assert!(cohen_kappa(&a, &b).unwrap().kappa.abs() < 0.05);
    assert_eq!(cohen_kappa(&a, &a).unwrap().kappa, 1.0);
}

#[test]
fn oracle_tagger_scores_perfectly_in_every_fold() {
    let corpus = synthetic::generate(40, 9);
    let report = cross_validate(&corpus, 10, 1, false, |_, test| Ok::<_, String>(test.tag_sequences())).unwrap();
    assert_eq!(report.folds.len(), 10);
    assert_eq!(report.mean.f1, 1.0);
    assert_eq!(report.std.f1, 0.0);
    assert_eq!(report.best_fold, 0);
}

#[test]
fn cross_validation_is_reproducible_and_reports_failures() {
    let corpus = synthetic::generate(30, 2);
    // tag everything O: precision 0, recall 0
    let all_o = |_: &_, test: &ner_core::Corpus| -> Result<Vec<Vec<Label>>, String> {
        Ok(test.sentences().iter().map(|s| vec![Label::O; s.len()]).collect())
    };
    let a = cross_validate(&corpus, 5, 3, false, all_o).unwrap();
    let b = cross_validate(&corpus, 5, 3, false, all_o).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.mean.f1, 0.0);
    let err = cross_validate(&corpus, 5, 3, false, |_, _| Err::<Vec<Vec<Label>>, _>("boom")).unwrap_err();
    assert!(err.to_string().contains("boom"));
}

#[test]
fn include_o_changes_the_micro_average() {
    let corpus = synthetic::generate(10, 4);
    let gold = corpus.tag_sequences();
    let mut pred = gold.clone();
    pred[0][0] = if pred[0][0] == Label::O { Label::SCHEME[1] } else { Label::O };
    let without = tag_metrics(&corpus, &pred, false).unwrap().micro.f1;
    let with = tag_metrics(&corpus, &pred, true).unwrap().micro.f1;
    assert!(with > without);
}

#[test]
fn paired_ttest_detects_a_consistent_gap() {
    let a = [0.82, 0.81, 0.83, 0.80, 0.82, 0.84, 0.81, 0.82, 0.83, 0.81];
    let b = [0.78, 0.77, 0.79, 0.78, 0.76, 0.80, 0.78, 0.77, 0.79, 0.77];
    let t = paired_ttest(&a, &b).unwrap();
    assert_eq!(t.df, 9);
    assert!(t.t > 0.0 && t.p < 0.05);
    let swapped = paired_ttest(&b, &a).unwrap();
    assert!((swapped.t + t.t).abs() < 1e-12 && (swapped.p - t.p).abs() < 1e-15);
}
