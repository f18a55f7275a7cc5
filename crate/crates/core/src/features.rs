//! Token feature templates, a dictionary-style feature index and max-abs
//! scaling.
//!
//! Feature keys emitted by [`token_features`] (see `docs/FEATURES.md`):
//!
//! | key | value |
//! |-----|-------|
//! | `bias` | 1 |
//! | `word.lower` | lowercased surface |
//! | `prefix1`..`prefix3` | leading 1..3 characters (clamped to length) |
//! | `suffix1`..`suffix3` | trailing 1..3 characters (clamped to length) |
//! | `is_digit` | 1 if every character is a digit, else 0 |
//! | `is_title` | 1 if the token starts with a Latin capital, else 0 |
//! | `has_symbol` | 1 if any character is neither letter nor digit, else 0 |
//! | `shape` | [`word_shape`] |
//! | `length` | character count |
//! | `-2:word.lower` .. `+2:word.lower` | neighbor surface, `<BOS>`/`<EOS>` past the edges |

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

pub const BOS: &str = "<BOS>";
pub const EOS: &str = "<EOS>";

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("position {position} is out of range for a sentence of {len} tokens")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("word shape of an empty token")]
    EmptyToken,
    #[error("feature index has not been fitted")]
    NotFitted,
    #[error("feature index is frozen")]
    Frozen,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Str(String),
    Num(f64),
}

/// Named features of one token position. Keys are unique.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FeatureSet {
    entries: Vec<(String, FeatureValue)>,
}

impl FeatureSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces `name`.
    pub fn set(&mut self, name: impl Into<String>, value: FeatureValue) {
        let name = name.into();
        match self.entries.iter_mut().find(|(k, _)| *k == name) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((name, value)),
        }
    }

    pub fn set_str(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.set(name, FeatureValue::Str(value.into()));
    }

    pub fn set_num(&mut self, name: impl Into<String>, value: f64) {
        self.set(name, FeatureValue::Num(value));
    }

    pub fn get(&self, name: &str) -> Option<&FeatureValue> {
        self.entries.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &FeatureValue)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index keys with their values: `name=value` for strings, `name` for
    /// numbers.
    pub fn keyed(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.entries.iter().map(|(k, v)| match v {
            FeatureValue::Str(s) => (format!("{k}={s}"), 1.0),
            FeatureValue::Num(x) => (k.clone(), *x),
        })
    }
}

/// Which features to extract.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureTemplate {
    /// Neighbor window on each side.
    pub window: usize,
}

impl Default for FeatureTemplate {
    fn default() -> Self {
        FeatureTemplate { window: 2 }
    }
}

impl FeatureTemplate {
    /// Feature sets for every position of a sentence.
    pub fn sentence_features<S: AsRef<str>>(&self, surfaces: &[S]) -> Vec<FeatureSet> {
        (0..surfaces.len())
            .map(|i| token_features(surfaces, i, self.window).expect("position in range"))
            .collect()
    }
}

/// ASCII digits, Arabic-Indic and extended Arabic-Indic digits.
pub fn is_digit_char(c: char) -> bool {
    c.is_ascii_digit() || ('\u{0660}'..='\u{0669}').contains(&c) || ('\u{06F0}'..='\u{06F9}').contains(&c)
}

fn is_arabic_letter(c: char) -> bool {
    let arabic_block = matches!(c as u32,
        0x0600..=0x06FF | 0x0750..=0x077F | 0x08A0..=0x08FF | 0xFB50..=0xFDFF | 0xFE70..=0xFEFF);
    arabic_block && c.is_alphabetic()
}

/// Collapsed character-class shape. Latin upper `X`, Latin lower `x`,
/// digits `#`, Arabic-script letters `a`, everything else `-`.
pub fn word_shape(token: &str) -> Result<String, FeatureError> {
    if token.is_empty() {
        return Err(FeatureError::EmptyToken);
    }
    let mut shape = String::new();
    for c in token.chars() {
        let class = if c.is_ascii_uppercase() {
            'X'
        } else if c.is_ascii_lowercase() {
            'x'
        } else if is_digit_char(c) {
            '#'
        } else if is_arabic_letter(c) {
            'a'
        } else {
            '-'
        };
        if !shape.ends_with(class) {
            shape.push(class);
        }
    }
    Ok(shape)
}

fn lower(s: &str) -> String {
    s.to_lowercase()
}

fn prefix(chars: &[char], n: usize) -> String {
    chars[..n.min(chars.len())].iter().collect()
}

fn suffix(chars: &[char], n: usize) -> String {
    chars[chars.len() - n.min(chars.len())..].iter().collect()
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Features of position `i`, looking `window` tokens to each side.
pub fn token_features<S: AsRef<str>>(sentence: &[S], i: usize, window: usize) -> Result<FeatureSet, FeatureError> {
    let len = sentence.len();
    if i >= len {
        return Err(FeatureError::PositionOutOfRange { position: i, len });
    }
    let word = sentence[i].as_ref();
    let chars: Vec<char> = word.chars().collect();
    let mut fs = FeatureSet::new();
    fs.set_num("bias", 1.0);
    fs.set_str("word.lower", lower(word));
    for n in 1..=3 {
        fs.set_str(format!("prefix{n}"), prefix(&chars, n));
        fs.set_str(format!("suffix{n}"), suffix(&chars, n));
    }
    fs.set_num("is_digit", flag(!chars.is_empty() && chars.iter().all(|&c| is_digit_char(c))));
    fs.set_num("is_title", flag(chars.first().is_some_and(|c| c.is_ascii_uppercase())));
    fs.set_num("has_symbol", flag(chars.iter().any(|&c| !c.is_alphanumeric())));
    if let Ok(shape) = word_shape(word) {
        fs.set_str("shape", shape);
    }
    fs.set_num("length", chars.len() as f64);
    for offset in 1..=window {
        let left = match i.checked_sub(offset) {
            Some(j) => lower(sentence[j].as_ref()),
            None => BOS.to_string(),
        };
        let right = match sentence.get(i + offset) {
            Some(w) => lower(w.as_ref()),
            None => EOS.to_string(),
        };
        fs.set_str(format!("-{offset}:word.lower"), left);
        fs.set_str(format!("+{offset}:word.lower"), right);
    }
    Ok(fs)
}

/// Sorted sparse vector without explicit zeros.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector<T> {
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> SparseVector<T> {
    /// Sorts by column, sums duplicates and drops zeros.
    pub fn from_pairs(mut pairs: Vec<(usize, T)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(usize, T)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != T::zero());
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn dot(&self, dense: &[T]) -> T {
        self.entries.iter().map(|&(i, v)| dense.get(i).map_or(T::zero(), |&w| w * v)).sum()
    }

    pub fn squared_norm(&self) -> T {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }
}

/// Maps feature keys to dense column ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureIndex {
    keys: Vec<String>,
    ids: HashMap<String, usize>,
    frozen: bool,
}

impl FeatureIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds a frozen index from its key table, e.g. after loading a model.
    pub fn from_keys(keys: Vec<String>) -> Self {
        let ids = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        FeatureIndex { keys, ids, frozen: true }
    }

    /// Adds every key of `fs` not seen yet.
    pub fn observe(&mut self, fs: &FeatureSet) -> Result<(), FeatureError> {
        if self.frozen {
            return Err(FeatureError::Frozen);
        }
        for (key, _) in fs.keyed() {
            if !self.ids.contains_key(&key) {
                self.ids.insert(key.clone(), self.keys.len());
                self.keys.push(key);
            }
        }
        Ok(())
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn id(&self, key: &str) -> Option<usize> {
        self.ids.get(key).copied()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    /// Unseen keys are dropped.
    pub fn vectorize<T: Scalar>(&self, fs: &FeatureSet) -> Result<SparseVector<T>, FeatureError> {
        if !self.frozen {
            return Err(FeatureError::NotFitted);
        }
        let pairs = fs.keyed().filter_map(|(k, v)| self.id(&k).map(|i| (i, T::of(v)))).collect();
        Ok(SparseVector::from_pairs(pairs))
    }
}

/// Builds and freezes an index over every feature set.
pub fn fit_index<'a>(sets: impl IntoIterator<Item = &'a FeatureSet>) -> FeatureIndex {
    let mut index = FeatureIndex::new();
    for fs in sets {
        index.observe(fs).expect("fresh index is not frozen");
    }
    index.freeze();
    index
}

/// Per-column maximum absolute value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Scaler<T> {
    factors: Vec<T>,
}

impl<T: Scalar> Scaler<T> {
    pub fn from_factors(factors: Vec<T>) -> Self {
        Scaler { factors }
    }

    pub fn factors(&self) -> &[T] {
        &self.factors
    }

    /// Columns with factor 0 (or beyond the fitted width) pass through.
    pub fn apply(&self, v: &SparseVector<T>) -> SparseVector<T> {
        let entries = v
            .iter()
            .map(|(i, x)| match self.factors.get(i) {
                Some(&f) if f > T::zero() => (i, x / f),
                _ => (i, x),
            })
            .collect();
        SparseVector { entries }
    }
}

pub fn fit_scaler<'a, T: Scalar>(vectors: impl IntoIterator<Item = &'a SparseVector<T>>) -> Scaler<T> {
    let mut factors: Vec<T> = Vec::new();
    for v in vectors {
        for (i, x) in v.iter() {
            if i >= factors.len() {
                factors.resize(i + 1, T::zero());
            }
            factors[i] = factors[i].max(x.abs());
        }
    }
    Scaler { factors }
}

pub fn apply_scaler<T: Scalar>(v: &SparseVector<T>, scaler: &Scaler<T>) -> SparseVector<T> {
    scaler.apply(v)
}
