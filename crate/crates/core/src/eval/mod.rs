//! Precision/recall/F1, cross-validation, significance testing and
//! inter-annotator agreement.

mod report;
mod stats;

use std::collections::BTreeMap;
use std::fmt::Display;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use report::{comparison_ndjson, ndjson, report_header, REPORT_FORMAT, REPORT_VERSION};
pub use stats::{cohen_kappa, ln_gamma, paired_ttest, regularized_incomplete_beta, student_t_two_sided_p, KappaReport, TTest};

use crate::corpus::{split_kfold, Corpus, CorpusError};
use crate::{Entity, Label};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("prediction count {pred} does not match sentence count {gold}")]
    SentenceCount { gold: usize, pred: usize },
    #[error("sentence {sentence}: {pred} predicted tags for {gold} tokens")]
    LengthMismatch { sentence: usize, gold: usize, pred: usize },
    #[error("sequences differ in length ({a} vs {b})")]
    SequenceLength { a: usize, b: usize },
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("fold {fold}: {message}")]
    Fold { fold: usize, message: String },
    #[error(transparent)]
    Split(#[from] CorpusError),
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Counts and derived scores for one tag, entity type or aggregate.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Scores {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Scores {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        Scores { tp, fp, fn_, precision, recall, f1: f1(precision, recall) }
    }

    /// Gold occurrences.
    pub fn support(&self) -> usize {
        self.tp + self.fn_
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Per-BIO-tag token counts.
    Token,
    /// Exact entity-span matches.
    Span,
}

/// Per-tag (or per-entity in span mode) scores with micro and macro
/// aggregates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TagReport {
    pub mode: EvalMode,
    pub include_o: bool,
    /// Rows for every tag seen in gold or predictions, in scheme order.
    pub rows: Vec<(String, Scores)>,
    pub micro: Scores,
    /// Unweighted mean of the row scores (`tp`/`fp`/`fn` left at 0).
    pub macro_avg: Scores,
}

impl TagReport {
    pub fn row(&self, name: &str) -> Option<&Scores> {
        self.rows.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    fn from_rows(mode: EvalMode, include_o: bool, rows: Vec<(String, Scores)>) -> Self {
        let (tp, fp, fn_) = rows.iter().fold((0, 0, 0), |(a, b, c), (_, s)| (a + s.tp, b + s.fp, c + s.fn_));
        let micro = Scores::from_counts(tp, fp, fn_);
        let n = rows.len().max(1) as f64;
        let macro_avg = Scores {
            precision: rows.iter().map(|(_, s)| s.precision).sum::<f64>() / n,
            recall: rows.iter().map(|(_, s)| s.recall).sum::<f64>() / n,
            f1: rows.iter().map(|(_, s)| s.f1).sum::<f64>() / n,
            ..Default::default()
        };
        TagReport { mode, include_o, rows, micro, macro_avg }
    }
}

fn check_shapes(gold: &Corpus, pred: &[Vec<Label>]) -> Result<(), EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::SentenceCount { gold: gold.len(), pred: pred.len() });
    }
    for (i, (s, p)) in gold.sentences().iter().zip(pred).enumerate() {
        if s.len() != p.len() {
            return Err(EvalError::LengthMismatch { sentence: i, gold: s.len(), pred: p.len() });
        }
    }
    Ok(())
}

/// Token-level counts per tag. `O` is left out of rows and aggregates unless
/// `include_o`.
pub fn tag_metrics(gold: &Corpus, pred: &[Vec<Label>], include_o: bool) -> Result<TagReport, EvalError> {
    check_shapes(gold, pred)?;
    let mut counts = [(0usize, 0usize, 0usize); 11];
    for (s, p) in gold.sentences().iter().zip(pred) {
        for (t, &guess) in s.tokens().iter().zip(p) {
            if t.tag == guess {
                counts[guess.index()].0 += 1;
            } else {
                counts[guess.index()].1 += 1;
                counts[t.tag.index()].2 += 1;
            }
        }
    }
    let rows = Label::SCHEME
        .iter()
        .filter(|&&l| include_o || l != Label::O)
        .filter(|l| counts[l.index()] != (0, 0, 0))
        .map(|l| {
            let (tp, fp, fn_) = counts[l.index()];
            (l.to_string(), Scores::from_counts(tp, fp, fn_))
        })
        .collect();
    Ok(TagReport::from_rows(EvalMode::Token, include_o, rows))
}

/// Entity spans `(start, end_exclusive, entity)` of one tag sequence. A span
/// opens at `B-X` or at an `I-X` that does not continue an `X` span.
pub fn spans(tags: &[Label]) -> Vec<(usize, usize, Entity)> {
    let mut out = Vec::new();
    let mut open: Option<(usize, Entity)> = None;
    for (i, &tag) in tags.iter().enumerate() {
        let continues = matches!((tag, open), (Label::I(e), Some((_, o))) if e == o);
        if !continues {
            if let Some((start, e)) = open.take() {
                out.push((start, i, e));
            }
            open = tag.entity().map(|e| (i, e));
        }
    }
    if let Some((start, e)) = open {
        out.push((start, tags.len(), e));
    }
    out
}

/// Exact-match entity-span scores per entity type.
pub fn span_metrics(gold: &Corpus, pred: &[Vec<Label>]) -> Result<TagReport, EvalError> {
    check_shapes(gold, pred)?;
    let mut counts: BTreeMap<Entity, (usize, usize, usize)> = BTreeMap::new();
    for (s, p) in gold.sentences().iter().zip(pred) {
        let g = spans(&s.tags());
        let q = spans(p);
        for span in &q {
            let c = counts.entry(span.2).or_default();
            if g.contains(span) {
                c.0 += 1;
            } else {
                c.1 += 1;
            }
        }
        for span in g.iter().filter(|s| !q.contains(s)) {
            counts.entry(span.2).or_default().2 += 1;
        }
    }
    let rows = counts.into_iter().map(|(e, (tp, fp, fn_))| (e.code().to_string(), Scores::from_counts(tp, fp, fn_))).collect();
    Ok(TagReport::from_rows(EvalMode::Span, false, rows))
}

/// Evaluation in the requested mode.
pub fn evaluate(gold: &Corpus, pred: &[Vec<Label>], mode: EvalMode, include_o: bool) -> Result<TagReport, EvalError> {
    match mode {
        EvalMode::Token => tag_metrics(gold, pred, include_o),
        EvalMode::Span => span_metrics(gold, pred),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: Vec<TagReport>,
    pub mean: Prf,
    /// Sample standard deviation (n - 1 denominator).
    pub std: Prf,
    /// 0-based index of the fold with the highest micro F1 (first on ties).
    pub best_fold: usize,
}

impl CvReport {
    pub fn from_folds(folds: Vec<TagReport>) -> Self {
        let pick = |f: fn(&Scores) -> f64| -> Vec<f64> { folds.iter().map(|r| f(&r.micro)).collect() };
        let (p, r, f) = (pick(|s| s.precision), pick(|s| s.recall), pick(|s| s.f1));
        let mean = Prf { precision: mean(&p), recall: mean(&r), f1: mean(&f) };
        let std = Prf { precision: sample_std(&p), recall: sample_std(&r), f1: sample_std(&f) };
        let mut best_fold = 0;
        for (i, &v) in f.iter().enumerate() {
            if v > f[best_fold] {
                best_fold = i;
            }
        }
        CvReport { folds, mean, std, best_fold }
    }

    /// Micro F1 per fold.
    pub fn fold_f1(&self) -> Vec<f64> {
        self.folds.iter().map(|r| r.micro.f1).collect()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// K-fold cross-validation. `trainer(train, test)` returns predicted tags for
/// `test`. Folds may run concurrently; results stay in fold order.
pub fn cross_validate<F, E>(corpus: &Corpus, k: usize, seed: u64, include_o: bool, trainer: F) -> Result<CvReport, EvalError>
where
    F: Fn(&Corpus, &Corpus) -> Result<Vec<Vec<Label>>, E> + Sync,
    E: Display,
{
    let splits = split_kfold(corpus, k, seed)?;
    let folds = splits
        .par_iter()
        .enumerate()
        .map(|(i, (train, test))| {
            let pred = trainer(train, test).map_err(|e| EvalError::Fold { fold: i, message: e.to_string() })?;
            tag_metrics(test, &pred, include_o).map_err(|e| EvalError::Fold { fold: i, message: e.to_string() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CvReport::from_folds(folds))
}
