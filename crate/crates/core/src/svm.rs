//! One-vs-rest linear SVM token classifier.
//!
//! Each label gets a binary classifier trained on max-abs scaled feature
//! vectors by dual coordinate descent on
//!
//! ```text
//! min_w  1/2 |w|^2 + C * sum_i max(0, 1 - y_i (w . x_i + b))
//! ```
//!
//! The bias is folded in as an extra constant feature with value 1, so it is
//! regularized like any other weight. Instances are visited in corpus order
//! every epoch, which keeps training deterministic.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{repair_tags, Corpus};
use crate::features::{fit_index, fit_scaler, FeatureIndex, FeatureSet, FeatureTemplate, Scaler, SparseVector};
use crate::model_file::ModelFileError;
use crate::{Label, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum SvmError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("regularization C must be positive, got {0}")]
    InvalidC(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub c: f64,
    /// Stop once the projected-gradient spread of an epoch drops below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    pub features: FeatureTemplate,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 1.0, tolerance: 1e-4, max_epochs: 1000, features: FeatureTemplate::default() }
    }
}

/// Per-label weight vectors and biases with the shared index and scaler.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel<T> {
    labels: Vec<Label>,
    index: FeatureIndex,
    scaler: Scaler<T>,
    weights: Vec<Vec<T>>,
    biases: Vec<T>,
    config: SvmConfig,
}

impl<T: Scalar> LinearModel<T> {
    /// # Panics
    /// If the weight shapes disagree with the label count or index width.
    pub fn from_parts(
        labels: Vec<Label>,
        index: FeatureIndex,
        scaler: Scaler<T>,
        weights: Vec<Vec<T>>,
        biases: Vec<T>,
        config: SvmConfig,
    ) -> Self {
        assert_eq!(weights.len(), labels.len(), "one weight vector per label");
        assert_eq!(biases.len(), labels.len(), "one bias per label");
        assert!(weights.iter().all(|w| w.len() == index.len()), "weight width must match the index");
        LinearModel { labels, index, scaler, weights, biases, config }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn scaler(&self) -> &Scaler<T> {
        &self.scaler
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn biases(&self) -> &[T] {
        &self.biases
    }

    pub fn config(&self) -> &SvmConfig {
        &self.config
    }

    /// Scaled vector for one feature set.
    pub fn vectorize(&self, fs: &FeatureSet) -> SparseVector<T> {
        self.scaler.apply(&self.index.vectorize(fs).expect("model index is frozen"))
    }

    /// Decision value of every label classifier.
    pub fn scores(&self, x: &SparseVector<T>) -> Vec<T> {
        self.weights.iter().zip(&self.biases).map(|(w, &b)| x.dot(w) + b).collect()
    }

    /// Argmax label; ties go to the lowest label index.
    pub fn classify(&self, x: &SparseVector<T>) -> Label {
        let scores = self.scores(x);
        let mut best = 0;
        for (k, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = k;
            }
        }
        self.labels[best]
    }

    /// Tags each token independently.
    pub fn predict_tags<S: AsRef<str>>(&self, surfaces: &[S]) -> Vec<Label> {
        self.config
            .features
            .sentence_features(surfaces)
            .iter()
            .map(|fs| self.classify(&self.vectorize(fs)))
            .collect()
    }

    /// Tags every sentence; with `repair` the output goes through
    /// [`repair_tags`].
    pub fn tag_corpus(&self, corpus: &Corpus, repair: bool) -> Vec<Vec<Label>> {
        corpus
            .sentences()
            .iter()
            .map(|s| {
                let tags = self.predict_tags(&s.surfaces());
                if repair {
                    repair_tags(&tags)
                } else {
                    tags
                }
            })
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
        crate::model_file::save_svm(self, path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelFileError> {
        crate::model_file::load_svm(path)
    }
}

/// Result of one binary problem.
#[derive(Clone, Debug, PartialEq)]
pub struct BinarySolution<T> {
    pub weights: Vec<T>,
    pub bias: T,
    /// Dual objective `1/2 |w|^2 - sum alpha` after each epoch.
    pub dual_trace: Vec<T>,
    pub epochs: usize,
}

/// Dual coordinate descent for one hinge-loss problem. `targets[i]` is
/// `true` for the positive class.
pub fn solve_binary<T: Scalar>(
    xs: &[SparseVector<T>],
    targets: &[bool],
    dim: usize,
    c: T,
    tolerance: T,
    max_epochs: usize,
) -> BinarySolution<T> {
    assert_eq!(xs.len(), targets.len());
    let mut w = vec![T::zero(); dim];
    let mut b = T::zero();
    let mut alpha = vec![T::zero(); xs.len()];
    let mut alpha_sum = T::zero();
    let diag: Vec<T> = xs.iter().map(|x| x.squared_norm() + T::one()).collect();
    let mut dual_trace = Vec::new();
    let mut epochs = 0;

    while epochs < max_epochs {
        epochs += 1;
        let mut pg_max = T::neg_infinity();
        let mut pg_min = T::infinity();
        for (i, x) in xs.iter().enumerate() {
            let y = if targets[i] { T::one() } else { -T::one() };
            let g = y * (x.dot(&w) + b) - T::one();
            let a = alpha[i];
            let pg = if a == T::zero() {
                g.min(T::zero())
            } else if a == c {
                g.max(T::zero())
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != T::zero() {
                let updated = (a - g / diag[i]).max(T::zero()).min(c);
                let delta = (updated - a) * y;
                alpha[i] = updated;
                alpha_sum += updated - a;
                for (f, v) in x.iter() {
                    w[f] += delta * v;
                }
                b += delta;
            }
        }
        let half = T::of(0.5);
        let norm: T = w.iter().map(|&v| v * v).sum::<T>() + b * b;
        dual_trace.push(half * norm - alpha_sum);
        if pg_max - pg_min < tolerance {
            break;
        }
    }
    BinarySolution { weights: w, bias: b, dual_trace, epochs }
}

/// Trains one classifier per scheme label on every token of the corpus.
pub fn train_svm<T: Scalar>(corpus: &Corpus, config: &SvmConfig) -> Result<LinearModel<T>, SvmError> {
    if corpus.token_count() == 0 {
        return Err(SvmError::EmptyCorpus);
    }
    if config.c.is_nan() || config.c <= 0.0 {
        return Err(SvmError::InvalidC(config.c));
    }
    let mut sets = Vec::with_capacity(corpus.token_count());
    let mut gold = Vec::with_capacity(corpus.token_count());
    for s in corpus.sentences() {
        sets.extend(config.features.sentence_features(&s.surfaces()));
        gold.extend(s.tags());
    }
    let index = fit_index(&sets);
    let raw: Vec<SparseVector<T>> = sets.iter().map(|fs| index.vectorize(fs).expect("index is frozen")).collect();
    let scaler = fit_scaler(&raw);
    let xs: Vec<SparseVector<T>> = raw.iter().map(|v| scaler.apply(v)).collect();

    let labels = Label::SCHEME.to_vec();
    let (c, tol) = (T::of(config.c), T::of(config.tolerance));
    let solutions: Vec<BinarySolution<T>> = labels
        .par_iter()
        .map(|&label| {
            let targets: Vec<bool> = gold.iter().map(|&g| g == label).collect();
            solve_binary(&xs, &targets, index.len(), c, tol, config.max_epochs)
        })
        .collect();
    let (weights, biases) = solutions.into_iter().map(|s| (s.weights, s.bias)).unzip();
    Ok(LinearModel { labels, index, scaler, weights, biases, config: *config })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_conll, validate_bio};
    use crate::Entity;

    #[test]
    fn separable_toy_problem() {
        let xs: Vec<SparseVector<f64>> = [(0usize, 1.0), (0, 0.8), (1, 1.0), (1, 0.9)]
            .iter()
            .map(|&(i, v)| SparseVector::from_pairs(vec![(i, v)]))
            .collect();
        let targets = [true, true, false, false];
        let sol = solve_binary(&xs, &targets, 2, 1.0, 1e-6, 1000);
        for (x, &t) in xs.iter().zip(&targets) {
            let s = x.dot(&sol.weights) + sol.bias;
            assert_eq!(s > 0.0, t);
        }
        assert!(sol.dual_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    fn zero_model(labels: Vec<Label>) -> LinearModel<f64> {
        let mut fs = FeatureSet::new();
        fs.set_str("word.lower", "x");
        let index = fit_index([&fs]);
        let n = labels.len();
        LinearModel::from_parts(labels, index, Scaler::default(), vec![vec![0.0; 1]; n], vec![0.0; n], SvmConfig::default())
    }

    #[test]
    fn zero_weights_pick_first_label() {
        let m = zero_model(Label::SCHEME.to_vec());
        assert_eq!(m.predict_tags(&["a", "b", "x"]), vec![Label::O; 3]);
    }

    #[test]
    fn argmax_wins() {
        let mut m = zero_model(Label::SCHEME.to_vec());
        m.biases[0] = 0.2;
        m.biases[1] = 1.5;
        assert_eq!(m.predict_tags(&["a"]), vec![Label::B(Entity::Per)]);
    }

    #[test]
    fn no_bio_masking_without_repair() {
        let mut m = zero_model(Label::SCHEME.to_vec());
        m.biases[Label::I(Entity::Per).index()] = 5.0;
        let c = parse_conll("a O\nb O\n").unwrap();
        let tags = m.tag_corpus(&c, false);
        assert_eq!(tags[0], vec![Label::I(Entity::Per); 2]);
        assert_eq!(validate_bio(&c.with_tags(&tags)).len(), 1);
        let fixed = m.tag_corpus(&c, true);
        assert!(validate_bio(&c.with_tags(&fixed)).is_empty());
    }

    #[test]
    fn positive_rescaling_keeps_decisions() {
        let c = parse_conll("Aga B-PER\nhat O\n. O\n\nHewler B-LOC\n. O\n").unwrap();
        let m = train_svm::<f64>(&c, &SvmConfig::default()).unwrap();
        let mut scaled = m.clone();
        scaled.weights.iter_mut().flatten().for_each(|w| *w *= 3.5);
        scaled.biases.iter_mut().for_each(|b| *b *= 3.5);
        assert_eq!(m.tag_corpus(&c, false), scaled.tag_corpus(&c, false));
    }

    #[test]
    fn trains_deterministically() {
        let c = parse_conll("Aga B-PER\nHama I-PER\nhat O\n. O\n\nlo O\nHewler B-LOC\n. O\n").unwrap();
        let a = train_svm::<f64>(&c, &SvmConfig::default()).unwrap();
        let b = train_svm::<f64>(&c, &SvmConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.tag_corpus(&c, false), c.tag_sequences());
    }

    #[test]
    fn rejects_empty_corpus_and_bad_c() {
        assert_eq!(train_svm::<f64>(&Corpus::default(), &SvmConfig::default()).unwrap_err(), SvmError::EmptyCorpus);
        let c = parse_conll("a O\n").unwrap();
        let cfg = SvmConfig { c: 0.0, ..Default::default() };
        assert_eq!(train_svm::<f64>(&c, &cfg).unwrap_err(), SvmError::InvalidC(0.0));
    }
}
