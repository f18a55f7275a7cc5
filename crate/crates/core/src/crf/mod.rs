//! Linear-chain conditional random field.
//!
//! A model scores a label path `y` for token features `x` as
//!
//! ```text
//! score(y, x) = sum_i sum_f x_i[f] * emit[f][y_i] + sum_{i>0} trans[y_{i-1}][y_i]
//! p(y | x)    = exp(score(y, x)) / Z(x)
//! ```
//!
//! Transition weights depend only on the label pair. Training minimizes the
//! negative log-likelihood plus `l1 * |w|_1 + l2 / 2 * |w|^2` with OWL-QN,
//! starting from all-zero weights.

mod lattice;
pub mod owlqn;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lattice::{forward_log_z, marginals, viterbi, Lattice, Marginals, BIO_MASK};
pub use owlqn::{OptimError, Termination};

use crate::corpus::{Corpus, Sentence};
use crate::features::{fit_index, FeatureIndex, FeatureSet, FeatureTemplate, SparseVector};
use crate::model_file::ModelFileError;
use crate::{Label, Scalar};

#[derive(Debug, Error)]
pub enum CrfError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("label {0} is not part of the model's label set")]
    UnknownLabel(Label),
    #[error(transparent)]
    Optimizer(#[from] OptimError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub l1: f64,
    pub l2: f64,
    pub max_iterations: usize,
    /// Relative objective decrease over `period` iterations that counts as
    /// converged.
    pub tolerance: f64,
    pub period: usize,
    /// Correction pairs kept by the quasi-Newton update.
    pub history: usize,
    pub features: FeatureTemplate,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l1: 0.1,
            l2: 0.1,
            max_iterations: 200,
            tolerance: 1e-5,
            period: 10,
            history: 6,
            features: FeatureTemplate::default(),
        }
    }
}

/// A vectorized training sentence: one sparse vector per token and the gold
/// label columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<T> {
    pub features: Vec<SparseVector<T>>,
    pub gold: Vec<usize>,
}

impl<T> Instance<T> {
    pub fn len(&self) -> usize {
        self.gold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gold.is_empty()
    }
}

/// Borrowed weights; lets the trainer score without building a model.
#[derive(Clone, Copy)]
struct Weights<'a, T> {
    labels: usize,
    emission: &'a [T],
    transition: &'a [T],
}

impl<T: Scalar> Weights<'_, T> {
    fn lattice(&self, features: &[SparseVector<T>]) -> Lattice<T> {
        let l = self.labels;
        let mut lat = Lattice::zeros(features.len(), l);
        for (i, v) in features.iter().enumerate() {
            for (f, x) in v.iter() {
                let row = &self.emission[f * l..(f + 1) * l];
                for (y, &w) in row.iter().enumerate() {
                    *lat.emission_mut(i, y) += x * w;
                }
            }
        }
        for p in 0..l {
            for c in 0..l {
                *lat.transition_mut(p, c) = self.transition[p * l + c];
            }
        }
        lat
    }

    /// Adds this instance's nll gradient into `grad` (emission block, then
    /// transition block) and returns its nll.
    fn accumulate(&self, inst: &Instance<T>, grad: &mut [T]) -> T {
        let l = self.labels;
        let n = inst.len();
        if n == 0 {
            return T::zero();
        }
        let lat = self.lattice(&inst.features);
        let m = marginals(&lat);
        let (g_emit, g_trans) = grad.split_at_mut(self.emission.len());
        for (i, v) in inst.features.iter().enumerate() {
            for (f, x) in v.iter() {
                let row = &mut g_emit[f * l..(f + 1) * l];
                for (y, g) in row.iter_mut().enumerate() {
                    *g += x * m.node(i, y);
                }
                row[inst.gold[i]] -= x;
            }
        }
        for i in 1..n {
            for p in 0..l {
                for c in 0..l {
                    g_trans[p * l + c] += m.edge(i, p, c);
                }
            }
            g_trans[inst.gold[i - 1] * l + inst.gold[i]] -= T::one();
        }
        m.log_z - lat.path_score(&inst.gold)
    }
}

/// A trained (or hand-built) linear-chain CRF.
#[derive(Clone, Debug, PartialEq)]
pub struct CrfModel<T> {
    labels: Vec<Label>,
    index: FeatureIndex,
    /// `features x labels`, row-major.
    emission: Vec<T>,
    /// `labels x labels`, indexed `[prev][cur]`.
    transition: Vec<T>,
    config: TrainConfig,
}

impl<T: Scalar> CrfModel<T> {
    /// All-zero model over the given labels and frozen index.
    pub fn zeros(labels: Vec<Label>, index: FeatureIndex, config: TrainConfig) -> Self {
        let l = labels.len();
        CrfModel { emission: vec![T::zero(); index.len() * l], transition: vec![T::zero(); l * l], labels, index, config }
    }

    /// # Panics
    /// If the weight buffers do not match the label and feature counts.
    pub fn from_parts(
        labels: Vec<Label>,
        index: FeatureIndex,
        emission: Vec<T>,
        transition: Vec<T>,
        config: TrainConfig,
    ) -> Self {
        let l = labels.len();
        assert_eq!(emission.len(), index.len() * l, "emission weight count");
        assert_eq!(transition.len(), l * l, "transition weight count");
        CrfModel { labels, index, emission, transition, config }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn emission_weights(&self) -> &[T] {
        &self.emission
    }

    pub fn transition_weights(&self) -> &[T] {
        &self.transition
    }

    pub fn emission_weight(&self, feature: usize, label: usize) -> T {
        self.emission[feature * self.labels.len() + label]
    }

    pub fn emission_weight_mut(&mut self, feature: usize, label: usize) -> &mut T {
        let l = self.labels.len();
        &mut self.emission[feature * l + label]
    }

    pub fn transition_weight_mut(&mut self, prev: usize, cur: usize) -> &mut T {
        let l = self.labels.len();
        &mut self.transition[prev * l + cur]
    }

    /// Emission weights followed by transition weights.
    pub fn parameters(&self) -> Vec<T> {
        self.emission.iter().chain(&self.transition).copied().collect()
    }

    /// Inverse of [`CrfModel::parameters`].
    pub fn set_parameters(&mut self, params: &[T]) {
        assert_eq!(params.len(), self.emission.len() + self.transition.len());
        let (e, t) = params.split_at(self.emission.len());
        self.emission.copy_from_slice(e);
        self.transition.copy_from_slice(t);
    }

    pub fn num_parameters(&self) -> usize {
        self.emission.len() + self.transition.len()
    }

    fn weights(&self) -> Weights<'_, T> {
        Weights { labels: self.labels.len(), emission: &self.emission, transition: &self.transition }
    }

    fn label_column(&self, label: Label) -> Result<usize, CrfError> {
        self.labels.iter().position(|&l| l == label).ok_or(CrfError::UnknownLabel(label))
    }

    /// Feature vectors for a sentence under this model's template and index.
    pub fn vectorize<S: AsRef<str>>(&self, surfaces: &[S]) -> Vec<SparseVector<T>> {
        self.vectorize_sets(&self.config.features.sentence_features(surfaces))
    }

    fn vectorize_sets(&self, sets: &[FeatureSet]) -> Vec<SparseVector<T>> {
        sets.iter().map(|fs| self.index.vectorize(fs).expect("model index is frozen")).collect()
    }

    /// Vectorizes a tagged sentence for likelihood evaluation.
    pub fn instance(&self, sentence: &Sentence) -> Result<Instance<T>, CrfError> {
        let gold = sentence.tags().into_iter().map(|t| self.label_column(t)).collect::<Result<_, _>>()?;
        Ok(Instance { features: self.vectorize(&sentence.surfaces()), gold })
    }

    /// Lattice over pre-vectorized tokens.
    pub fn lattice(&self, features: &[SparseVector<T>]) -> Lattice<T> {
        self.weights().lattice(features)
    }

    /// Best label sequence for a sentence.
    pub fn tag<S: AsRef<str>>(&self, surfaces: &[S], constrain_bio: bool) -> (Vec<Label>, T) {
        if surfaces.is_empty() {
            return (Vec::new(), T::zero());
        }
        let lat = self.lattice(&self.vectorize(surfaces));
        self.decode_lattice(&lat, constrain_bio)
    }

    fn decode_lattice(&self, lat: &Lattice<T>, constrain_bio: bool) -> (Vec<Label>, T) {
        let (path, score) = if constrain_bio { viterbi(&lat.with_bio_mask(&self.labels)) } else { viterbi(lat) };
        (path.into_iter().map(|y| self.labels[y]).collect(), score)
    }

    /// Tags every sentence of a corpus.
    pub fn tag_corpus(&self, corpus: &Corpus, constrain_bio: bool) -> Vec<Vec<Label>> {
        corpus.sentences().iter().map(|s| self.tag(&s.surfaces(), constrain_bio).0).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
        crate::model_file::save_crf(self, path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelFileError> {
        crate::model_file::load_crf(path)
    }
}

/// Scores a sentence's feature sets against the model.
pub fn build_lattice<T: Scalar>(model: &CrfModel<T>, sets: &[FeatureSet]) -> Lattice<T> {
    model.lattice(&model.vectorize_sets(sets))
}

/// Negative log-likelihood of the gold path and its gradient (emission
/// block then transition block). Regularization is not included.
pub fn nll_and_gradient<T: Scalar>(model: &CrfModel<T>, instance: &Instance<T>) -> (T, Vec<T>) {
    let mut grad = vec![T::zero(); model.num_parameters()];
    let nll = model.weights().accumulate(instance, &mut grad);
    (nll, grad)
}

/// Argmax decoding from feature sets.
pub fn viterbi_decode<T: Scalar>(model: &CrfModel<T>, sets: &[FeatureSet], constrain_bio: bool) -> (Vec<Label>, T) {
    if sets.is_empty() {
        return (Vec::new(), T::zero());
    }
    model.decode_lattice(&build_lattice(model, sets), constrain_bio)
}

/// Optimizer outcome alongside a trained model.
#[derive(Clone, Debug)]
pub struct TrainSummary<T> {
    /// Regularized objective at the start and after each accepted step.
    pub trace: Vec<T>,
    pub iterations: usize,
    pub termination: Termination,
}

/// Trains on every sentence with the full 11-label scheme.
pub fn train_crf<T: Scalar>(corpus: &Corpus, config: &TrainConfig) -> Result<CrfModel<T>, CrfError> {
    train_crf_with_summary(corpus, config).map(|(m, _)| m)
}

pub fn train_crf_with_summary<T: Scalar>(
    corpus: &Corpus,
    config: &TrainConfig,
) -> Result<(CrfModel<T>, TrainSummary<T>), CrfError> {
    if corpus.token_count() == 0 {
        return Err(CrfError::EmptyCorpus);
    }
    let sets: Vec<Vec<FeatureSet>> =
        corpus.sentences().iter().map(|s| config.features.sentence_features(&s.surfaces())).collect();
    let index = fit_index(sets.iter().flatten());
    let mut model = CrfModel::zeros(Label::SCHEME.to_vec(), index, *config);
    let instances: Vec<Instance<T>> = corpus
        .sentences()
        .iter()
        .zip(&sets)
        .map(|(s, fs)| Instance { features: model.vectorize_sets(fs), gold: s.tags().iter().map(|t| t.index()).collect() })
        .collect();
    let summary = fit(&mut model, &instances, config)?;
    Ok((model, summary))
}

/// Runs the optimizer from the model's current weights over fixed
/// instances.
pub fn fit<T: Scalar>(model: &mut CrfModel<T>, instances: &[Instance<T>], config: &TrainConfig) -> Result<TrainSummary<T>, CrfError> {
    let labels = model.labels.len();
    let n_emit = model.emission.len();
    let l2 = T::of(config.l2);
    let half = T::of(0.5);
    let objective = |x: &[T], g: &mut [T]| {
        g.iter_mut().for_each(|v| *v = T::zero());
        let (emission, transition) = x.split_at(n_emit);
        let w = Weights { labels, emission, transition };
        let mut f = T::zero();
        for inst in instances {
            f += w.accumulate(inst, g);
        }
        if l2 > T::zero() {
            let mut sq = T::zero();
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi += l2 * xi;
                sq += xi * xi;
            }
            f += half * l2 * sq;
        }
        f
    };
    let opt = owlqn::OwlqnConfig {
        l1: T::of(config.l1),
        max_iterations: config.max_iterations,
        tolerance: T::of(config.tolerance),
        period: config.period.max(1),
        history: config.history.max(1),
        ..Default::default()
    };
    let res = owlqn::minimize(objective, model.parameters(), &opt)?;
    model.set_parameters(&res.x);
    Ok(TrainSummary { trace: res.trace, iterations: res.iterations, termination: res.termination })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_conll;
    use crate::features::FeatureValue;

    fn one_feature_model(weight: f64, label: usize) -> CrfModel<f64> {
        let mut fs = FeatureSet::new();
        fs.set_str("w", "x");
        let index = fit_index([&fs]);
        let mut m = CrfModel::zeros(Label::SCHEME.to_vec(), index, TrainConfig::default());
        *m.emission_weight_mut(0, label) = weight;
        m
    }

    #[test]
    fn zero_model_gives_zero_lattice() {
        let m = one_feature_model(0.0, 0);
        let mut fs = FeatureSet::new();
        fs.set_str("w", "x");
        let lat = build_lattice(&m, &[fs.clone(), fs]);
        assert_eq!(lat, Lattice::zeros(2, 11));
    }

    #[test]
    fn single_feature_fills_one_column() {
        let m = one_feature_model(2.5, 3);
        let mut fs = FeatureSet::new();
        fs.set_str("w", "x");
        let lat = build_lattice(&m, &[fs]);
        for y in 0..11 {
            assert_eq!(lat.emission(0, y), if y == 3 { 2.5 } else { 0.0 });
        }
    }

    #[test]
    fn numeric_features_scale_weights() {
        let mut fs = FeatureSet::new();
        fs.set("len", FeatureValue::Num(3.0));
        let index = fit_index([&fs]);
        let mut m = CrfModel::<f64>::zeros(vec![Label::O, Label::B(crate::Entity::Per)], index, TrainConfig::default());
        *m.emission_weight_mut(0, 1) = 0.5;
        assert_eq!(build_lattice(&m, &[fs]).emission(0, 1), 1.5);
    }

    #[test]
    fn zero_model_nll_is_log_labels() {
        let m = one_feature_model(0.0, 0);
        let inst = Instance { features: vec![SparseVector::from_pairs(vec![(0, 1.0)])], gold: vec![4] };
        let (nll, _) = nll_and_gradient(&m, &inst);
        assert!((nll - 11f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn instance_rejects_labels_outside_model() {
        let c = parse_conll("a B-PER\n").unwrap();
        let m = CrfModel::<f64>::zeros(vec![Label::O], FeatureIndex::from_keys(vec![]), TrainConfig::default());
        assert!(matches!(m.instance(&c.sentences()[0]), Err(CrfError::UnknownLabel(_))));
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(matches!(train_crf::<f64>(&Corpus::default(), &TrainConfig::default()), Err(CrfError::EmptyCorpus)));
    }

    #[test]
    fn learns_a_tiny_corpus() {
        let c = parse_conll("Aga B-PER\nHama I-PER\nhat O\n. O\n\nlo O\nHewler B-LOC\n. O\n").unwrap();
        let m = train_crf::<f64>(&c, &TrainConfig::default()).unwrap();
        assert_eq!(m.tag_corpus(&c, true), c.tag_sequences());
    }
}
