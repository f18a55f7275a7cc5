//! Binary model container shared by the CRF and SVM taggers.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "NERMODEL"
//! 8       4     format version, u32 LE (currently 1)
//! 12      1     model kind: 1 = CRF, 2 = SVM
//! 13      8     header length H, u64 LE
//! 21      H     header, UTF-8 JSON
//! 21+H    8     weight count W, u64 LE
//! 29+H    8W    weights, f64 LE
//! 29+H+8W 32    SHA-256 of header bytes followed by weight bytes
//! ```
//!
//! CRF header keys: `labels`, `features`, `config`, `emission`, `transition`
//! (the last two are weight counts). Weights are the `features x labels`
//! emission matrix row-major, then the `labels x labels` transition matrix
//! indexed `[prev][cur]`.
//!
//! SVM header keys: `labels`, `features`, `config`, `scaler`. Weights are
//! each label's weight vector in label order, then one bias per label, then
//! `scaler` max-abs factors.
//!
//! Weights are stored as `f64` regardless of the in-memory scalar, so `f32`
//! and `f64` models both round-trip bit-exactly.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::crf::{CrfModel, TrainConfig};
use crate::features::{FeatureIndex, Scaler};
use crate::svm::{LinearModel, SvmConfig};
use crate::{Label, Scalar};

pub const MAGIC: &[u8; 8] = b"NERMODEL";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum ModelKind {
    Crf = 1,
    Svm = 2,
}

impl ModelKind {
    fn from_byte(b: u8) -> Option<Self> {
        match b {
            1 => Some(ModelKind::Crf),
            2 => Some(ModelKind::Svm),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a model file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported model format version {0} (expected {VERSION})")]
    UnsupportedVersion(u32),
    #[error("unknown model kind byte {0}")]
    UnknownKind(u8),
    #[error("expected a {expected:?} model, found {found:?}")]
    WrongKind { expected: ModelKind, found: ModelKind },
    #[error("model file is truncated")]
    Truncated,
    #[error("trailing bytes after checksum")]
    TrailingBytes,
    #[error("weight checksum mismatch")]
    ChecksumMismatch,
    #[error("invalid header: {0}")]
    Header(String),
}

#[derive(Serialize, Deserialize)]
struct CrfHeader {
    labels: Vec<Label>,
    features: Vec<String>,
    config: TrainConfig,
    emission: usize,
    transition: usize,
}

#[derive(Serialize, Deserialize)]
struct SvmHeader {
    labels: Vec<Label>,
    features: Vec<String>,
    config: SvmConfig,
    scaler: usize,
}

/// Reads the kind byte without validating the rest of the file.
pub fn peek_kind(path: impl AsRef<Path>) -> Result<ModelKind, ModelFileError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 13 {
        return Err(if bytes.starts_with(&MAGIC[..bytes.len().min(8)]) { ModelFileError::Truncated } else { ModelFileError::BadMagic });
    }
    if &bytes[..8] != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    ModelKind::from_byte(bytes[12]).ok_or(ModelFileError::UnknownKind(bytes[12]))
}

/// Encodes a container into bytes.
pub fn encode(kind: ModelKind, header: &[u8], weights: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(61 + header.len() + 8 * weights.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(kind as u8);
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(header);
    out.extend_from_slice(&(weights.len() as u64).to_le_bytes());
    let start = out.len();
    for w in weights {
        out.extend_from_slice(&w.to_le_bytes());
    }
    let mut hasher = Sha256::new();
    hasher.update(header);
    hasher.update(&out[start..]);
    out.extend_from_slice(&hasher.finalize());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelFileError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(ModelFileError::Truncated)?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64, ModelFileError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Decodes and verifies a container, returning its kind, header bytes and
/// weights.
pub fn decode(bytes: &[u8]) -> Result<(ModelKind, Vec<u8>, Vec<f64>), ModelFileError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(8).map_err(|_| ModelFileError::BadMagic)?;
    if magic != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(ModelFileError::UnsupportedVersion(version));
    }
    let kind_byte = r.take(1)?[0];
    let kind = ModelKind::from_byte(kind_byte).ok_or(ModelFileError::UnknownKind(kind_byte))?;
    let header_len = usize::try_from(r.u64()?).map_err(|_| ModelFileError::Truncated)?;
    let header = r.take(header_len)?;
    let count = usize::try_from(r.u64()?).map_err(|_| ModelFileError::Truncated)?;
    let raw = r.take(count.checked_mul(8).ok_or(ModelFileError::Truncated)?)?;
    let checksum = r.take(32)?;
    if r.pos != bytes.len() {
        return Err(ModelFileError::TrailingBytes);
    }
    let mut hasher = Sha256::new();
    hasher.update(header);
    hasher.update(raw);
    if hasher.finalize().as_slice() != checksum {
        return Err(ModelFileError::ChecksumMismatch);
    }
    let weights = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((kind, header.to_vec(), weights))
}

fn read_kind(path: &Path, expected: ModelKind) -> Result<(Vec<u8>, Vec<f64>), ModelFileError> {
    let (kind, header, weights) = decode(&fs::read(path)?)?;
    if kind != expected {
        return Err(ModelFileError::WrongKind { expected, found: kind });
    }
    Ok((header, weights))
}

fn header_err(e: serde_json::Error) -> ModelFileError {
    ModelFileError::Header(e.to_string())
}

fn to_f64<T: Scalar>(xs: &[T]) -> impl Iterator<Item = f64> + '_ {
    xs.iter().map(|&x| x.as_f64())
}

fn from_f64<T: Scalar>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::of(x)).collect()
}

pub fn crf_to_bytes<T: Scalar>(model: &CrfModel<T>) -> Vec<u8> {
    let header = CrfHeader {
        labels: model.labels().to_vec(),
        features: model.index().keys().to_vec(),
        config: *model.config(),
        emission: model.emission_weights().len(),
        transition: model.transition_weights().len(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let weights: Vec<f64> = to_f64(model.emission_weights()).chain(to_f64(model.transition_weights())).collect();
    encode(ModelKind::Crf, &header, &weights)
}

pub fn crf_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<CrfModel<T>, ModelFileError> {
    let (kind, header, weights) = decode(bytes)?;
    if kind != ModelKind::Crf {
        return Err(ModelFileError::WrongKind { expected: ModelKind::Crf, found: kind });
    }
    crf_from_parts(&header, &weights)
}

fn crf_from_parts<T: Scalar>(header: &[u8], weights: &[f64]) -> Result<CrfModel<T>, ModelFileError> {
    let h: CrfHeader = serde_json::from_slice(header).map_err(header_err)?;
    let l = h.labels.len();
    if h.emission != h.features.len() * l || h.transition != l * l || weights.len() != h.emission + h.transition {
        return Err(ModelFileError::Header("weight counts do not match labels and features".into()));
    }
    let (e, t) = weights.split_at(h.emission);
    Ok(CrfModel::from_parts(h.labels, FeatureIndex::from_keys(h.features), from_f64(e), from_f64(t), h.config))
}

pub fn save_crf<T: Scalar>(model: &CrfModel<T>, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    fs::write(path, crf_to_bytes(model))?;
    Ok(())
}

pub fn load_crf<T: Scalar>(path: impl AsRef<Path>) -> Result<CrfModel<T>, ModelFileError> {
    let (header, weights) = read_kind(path.as_ref(), ModelKind::Crf)?;
    crf_from_parts(&header, &weights)
}

pub fn svm_to_bytes<T: Scalar>(model: &LinearModel<T>) -> Vec<u8> {
    let header = SvmHeader {
        labels: model.labels().to_vec(),
        features: model.index().keys().to_vec(),
        config: *model.config(),
        scaler: model.scaler().factors().len(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let weights: Vec<f64> = model
        .weights()
        .iter()
        .flat_map(|w| to_f64(w))
        .chain(to_f64(model.biases()))
        .chain(to_f64(model.scaler().factors()))
        .collect();
    encode(ModelKind::Svm, &header, &weights)
}

fn svm_from_parts<T: Scalar>(header: &[u8], weights: &[f64]) -> Result<LinearModel<T>, ModelFileError> {
    let h: SvmHeader = serde_json::from_slice(header).map_err(header_err)?;
    let (l, d) = (h.labels.len(), h.features.len());
    if weights.len() != l * d + l + h.scaler {
        return Err(ModelFileError::Header("weight count does not match labels, features and scaler".into()));
    }
    let (w, rest) = weights.split_at(l * d);
    let (b, s) = rest.split_at(l);
    let per_label = if d == 0 { vec![Vec::new(); l] } else { w.chunks(d).map(from_f64).collect() };
    Ok(LinearModel::from_parts(
        h.labels,
        FeatureIndex::from_keys(h.features),
        Scaler::from_factors(from_f64(s)),
        per_label,
        from_f64(b),
        h.config,
    ))
}

pub fn svm_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<LinearModel<T>, ModelFileError> {
    let (kind, header, weights) = decode(bytes)?;
    if kind != ModelKind::Svm {
        return Err(ModelFileError::WrongKind { expected: ModelKind::Svm, found: kind });
    }
    svm_from_parts(&header, &weights)
}

pub fn save_svm<T: Scalar>(model: &LinearModel<T>, path: impl AsRef<Path>) -> Result<(), ModelFileError> {
    fs::write(path, svm_to_bytes(model))?;
    Ok(())
}

pub fn load_svm<T: Scalar>(path: impl AsRef<Path>) -> Result<LinearModel<T>, ModelFileError> {
    let (header, weights) = read_kind(path.as_ref(), ModelKind::Svm)?;
    svm_from_parts(&header, &weights)
}
