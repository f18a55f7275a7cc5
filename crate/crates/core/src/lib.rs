//! Named-entity recognition toolkit for low-resource languages.
//!
//! The crate covers the whole tagging workflow for CoNLL/BIO corpora:
//!
//! * [`corpus`]: parsing, validation, repair, statistics and seeded splits
//! * [`preprocess`]: text cleaning, digit conversion and tokenization
//! * [`features`]: per-token feature templates, indexing and max-abs scaling
//! * [`crf`]: a linear-chain CRF with exact inference and OWL-QN training
//! * [`svm`]: a one-vs-rest linear SVM trained by dual coordinate descent
//! * [`eval`]: tag metrics, cross-validation, paired t-tests and Cohen's kappa
//! * [`model_file`]: the binary container used to persist trained models
//! * [`synthetic`]: seeded toy corpora with a known tagging rule
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases
//! below fix the scalar to `f64`, which is what the command-line tool uses.

pub mod corpus;
pub mod crf;
pub mod eval;
pub mod features;
pub mod model_file;
pub mod preprocess;
mod scalar;
pub mod svm;
pub mod synthetic;

pub use corpus::{Corpus, Entity, Label, Sentence, Token};
pub use scalar::Scalar;

/// CRF model with `f64` weights.
pub type CrfModel = crf::CrfModel<f64>;
/// Single-precision CRF model.
pub type CrfModel32 = crf::CrfModel<f32>;
/// Score lattice with `f64` entries.
pub type Lattice = crf::Lattice<f64>;
/// One-vs-rest linear SVM with `f64` weights.
pub type LinearModel = svm::LinearModel<f64>;
/// Single-precision linear SVM.
pub type LinearModel32 = svm::LinearModel<f32>;
/// Sparse feature vector with `f64` values.
pub type SparseVector = features::SparseVector<f64>;
/// Max-abs scaler with `f64` factors.
pub type Scaler = features::Scaler<f64>;
