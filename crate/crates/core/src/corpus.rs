//! CoNLL corpora with IOB2 tags.
//!
//! A corpus file holds one `<token> <tag>` pair per line and separates
//! sentences with blank lines. Reading accepts any run of spaces or tabs
//! between the columns and CRLF line endings; writing always emits a single
//! space and LF.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("line {line}: expected 2 columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: unknown tag {tag:?}")]
    UnknownTag { line: usize, tag: String },
    #[error("unknown tag {0:?}")]
    InvalidLabel(String),
    #[error("invalid token surface {0:?}")]
    InvalidSurface(String),
    #[error("sentence must contain at least one token")]
    EmptySentence,
    #[error("train fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
    #[error("holdout split needs at least 2 sentences, corpus has {0}")]
    TooFewSentences(usize),
    #[error("k = {k} is invalid for a corpus of {sentences} sentences")]
    InvalidFoldCount { k: usize, sentences: usize },
}

/// Entity types of the tag scheme, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Entity {
    Per,
    Loc,
    Org,
    Date,
    Misc,
}

impl Entity {
    pub const ALL: [Entity; 5] = [Entity::Per, Entity::Loc, Entity::Org, Entity::Date, Entity::Misc];

    /// Short code used inside tags (`PER`, `LOC`, ...).
    pub fn code(self) -> &'static str {
        match self {
            Entity::Per => "PER",
            Entity::Loc => "LOC",
            Entity::Org => "ORG",
            Entity::Date => "DATE",
            Entity::Misc => "MISC",
        }
    }

    /// Long name used in distribution reports.
    pub fn long_name(self) -> &'static str {
        match self {
            Entity::Per => "PERSON",
            Entity::Loc => "LOCATION",
            Entity::Org => "ORGANIZATION",
            Entity::Date => "DATE",
            Entity::Misc => "MISCELLANEOUS",
        }
    }

    fn from_code(s: &str) -> Option<Entity> {
        Entity::ALL.into_iter().find(|e| e.code() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// One IOB2 tag: `O`, `B-<ENT>` or `I-<ENT>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    O,
    B(Entity),
    I(Entity),
}

impl Label {
    /// The 11 labels in scheme order. `O` comes first, then `B-`/`I-` pairs
    /// in the order of the annotation tool's shortcut table. Index 0 is what
    /// tie-breaking falls back to.
    pub const SCHEME: [Label; 11] = [
        Label::O,
        Label::B(Entity::Per),
        Label::I(Entity::Per),
        Label::B(Entity::Loc),
        Label::I(Entity::Loc),
        Label::B(Entity::Org),
        Label::I(Entity::Org),
        Label::B(Entity::Date),
        Label::I(Entity::Date),
        Label::B(Entity::Misc),
        Label::I(Entity::Misc),
    ];

    /// Position in [`Label::SCHEME`].
    pub fn index(self) -> usize {
        match self {
            Label::O => 0,
            Label::B(e) => 1 + 2 * e.index(),
            Label::I(e) => 2 + 2 * e.index(),
        }
    }

    pub fn from_index(i: usize) -> Option<Label> {
        Label::SCHEME.get(i).copied()
    }

    pub fn entity(self) -> Option<Entity> {
        match self {
            Label::O => None,
            Label::B(e) | Label::I(e) => Some(e),
        }
    }

    pub fn is_inside(self) -> bool {
        matches!(self, Label::I(_))
    }

    /// Whether `self` may follow `prev` under IOB2. `prev = None` means
    /// sentence start.
    pub fn may_follow(self, prev: Option<Label>) -> bool {
        match self {
            Label::I(e) => matches!(prev, Some(Label::B(p)) | Some(Label::I(p)) if p == e),
            _ => true,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::O => f.write_str("O"),
            Label::B(e) => write!(f, "B-{}", e.code()),
            Label::I(e) => write!(f, "I-{}", e.code()),
        }
    }
}

impl FromStr for Label {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(Label::O);
        }
        let parsed = match s.split_once('-') {
            Some(("B", ent)) => Entity::from_code(ent).map(Label::B),
            Some(("I", ent)) => Entity::from_code(ent).map(Label::I),
            _ => None,
        };
        parsed.ok_or_else(|| CorpusError::InvalidLabel(s.to_string()))
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn is_column_space(c: char) -> bool {
    c == ' ' || c == '\t'
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    surface: String,
    pub tag: Label,
}

impl Token {
    /// Fails if the surface is empty or contains a space, tab, CR or LF.
    pub fn new(surface: impl Into<String>, tag: Label) -> Result<Token, CorpusError> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(|c| matches!(c, ' ' | '\t' | '\n' | '\r')) {
            return Err(CorpusError::InvalidSurface(surface));
        }
        Ok(Token { surface, tag })
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Result<Sentence, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptySentence);
        }
        Ok(Sentence { tokens })
    }

    /// Builds a sentence from `(surface, tag)` string pairs.
    pub fn from_pairs<S: AsRef<str>, T: AsRef<str>>(pairs: &[(S, T)]) -> Result<Sentence, CorpusError> {
        let tokens = pairs
            .iter()
            .map(|(s, t)| Token::new(s.as_ref(), t.as_ref().parse()?))
            .collect::<Result<Vec<_>, _>>()?;
        Sentence::new(tokens)
    }

    /// Builds an all-`O` sentence from surfaces.
    pub fn untagged<S: AsRef<str>>(surfaces: &[S]) -> Result<Sentence, CorpusError> {
        let tokens = surfaces
            .iter()
            .map(|s| Token::new(s.as_ref(), Label::O))
            .collect::<Result<Vec<_>, _>>()?;
        Sentence::new(tokens)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(Token::surface).collect()
    }

    pub fn tags(&self) -> Vec<Label> {
        self.tokens.iter().map(|t| t.tag).collect()
    }

    /// Same surfaces with the given tags.
    ///
    /// # Panics
    /// If `tags.len()` differs from the sentence length.
    pub fn with_tags(&self, tags: &[Label]) -> Sentence {
        assert_eq!(tags.len(), self.tokens.len(), "tag count must match token count");
        let tokens = self
            .tokens
            .iter()
            .zip(tags)
            .map(|(t, &tag)| Token { surface: t.surface.clone(), tag })
            .collect();
        Sentence { tokens }
    }
}

/// An ordered collection of sentences. Equality ignores provenance.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    sentences: Vec<Sentence>,
    pub provenance: Option<PathBuf>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.sentences == other.sentences
    }
}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Corpus {
        Corpus { sentences, provenance: None }
    }

    pub fn with_provenance(mut self, path: impl Into<PathBuf>) -> Corpus {
        self.provenance = Some(path.into());
        self
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn into_sentences(self) -> Vec<Sentence> {
        self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Tag sequences, one per sentence.
    pub fn tag_sequences(&self) -> Vec<Vec<Label>> {
        self.sentences.iter().map(Sentence::tags).collect()
    }

    /// Replaces every sentence's tags.
    ///
    /// # Panics
    /// If the shapes differ.
    pub fn with_tags(&self, tags: &[Vec<Label>]) -> Corpus {
        assert_eq!(tags.len(), self.sentences.len());
        Corpus {
            sentences: self.sentences.iter().zip(tags).map(|(s, t)| s.with_tags(t)).collect(),
            provenance: self.provenance.clone(),
        }
    }
}

/// Parses CoNLL text. Line numbers in errors are 1-based.
pub fn parse_conll(text: &str) -> Result<Corpus, CorpusError> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for (i, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let fields: Vec<&str> = line.split(is_column_space).filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            if !current.is_empty() {
                sentences.push(Sentence { tokens: std::mem::take(&mut current) });
            }
            continue;
        }
        if fields.len() != 2 {
            return Err(CorpusError::ColumnCount { line: i + 1, found: fields.len() });
        }
        let tag = fields[1]
            .parse::<Label>()
            .map_err(|_| CorpusError::UnknownTag { line: i + 1, tag: fields[1].to_string() })?;
        // fields never contain space/tab; a stray CR in the middle of a line does
        let token = Token::new(fields[0], tag)?;
        current.push(token);
    }
    if !current.is_empty() {
        sentences.push(Sentence { tokens: current });
    }
    Ok(Corpus::new(sentences))
}

/// Canonical CoNLL serialization: single-space columns, one blank line
/// between sentences, LF newlines.
pub fn serialize_conll(corpus: &Corpus) -> String {
    let mut out = String::new();
    for (i, sentence) in corpus.sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for token in &sentence.tokens {
            out.push_str(&token.surface);
            out.push(' ');
            out.push_str(&token.tag.to_string());
            out.push('\n');
        }
    }
    out
}

/// An `I-X` token that does not continue an `X` entity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// 0-based sentence index.
    pub sentence: usize,
    /// 0-based token index.
    pub token: usize,
    pub description: String,
}

/// Reports every IOB2 violation in the corpus.
pub fn validate_bio(corpus: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    for (si, sentence) in corpus.sentences.iter().enumerate() {
        let flags = tag_violations(&sentence.tags());
        for ti in (0..flags.len()).filter(|&ti| flags[ti].is_some()) {
            let tag = sentence.tokens[ti].tag;
            let description = match ti {
                0 => format!("{tag} at sentence start"),
                _ => format!("{tag} after {}", sentence.tokens[ti - 1].tag),
            };
            out.push(Violation { sentence: si, token: ti, description });
        }
    }
    out
}

/// Per-position violation flags for one tag sequence: `Some(entity)` where
/// an `I-entity` tag is illegal.
pub fn tag_violations(tags: &[Label]) -> Vec<Option<Entity>> {
    let mut prev = None;
    tags.iter()
        .map(|&tag| {
            let bad = if tag.may_follow(prev) { None } else { tag.entity() };
            prev = Some(tag);
            bad
        })
        .collect()
}

/// Rewrites every violating `I-X` to `B-X`, left to right.
pub fn repair_bio(corpus: &Corpus) -> Corpus {
    let tags: Vec<Vec<Label>> = corpus.sentences.iter().map(|s| repair_tags(&s.tags())).collect();
    corpus.with_tags(&tags)
}

/// Repairs a single tag sequence.
pub fn repair_tags(tags: &[Label]) -> Vec<Label> {
    let mut out: Vec<Label> = Vec::with_capacity(tags.len());
    for &tag in tags {
        let fixed = match tag {
            Label::I(e) if !tag.may_follow(out.last().copied()) => Label::B(e),
            _ => tag,
        };
        out.push(fixed);
    }
    out
}

/// Optional lint: sentences whose final token is not `. O`. Returns their
/// 0-based indices.
pub fn lint_final_period(corpus: &Corpus) -> Vec<usize> {
    corpus
        .sentences
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            let last = s.tokens.last().expect("sentences are non-empty");
            !(last.surface == "." && last.tag == Label::O)
        })
        .map(|(i, _)| i)
        .collect()
}

/// Token-level entity counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntityDistribution {
    /// Indexed by [`Entity::index`]; counts both `B-` and `I-` tokens.
    pub entity_counts: [usize; 5],
    pub outside: usize,
    pub total: usize,
}

impl EntityDistribution {
    pub fn count(&self, entity: Entity) -> usize {
        self.entity_counts[entity.index()]
    }

    /// `count / total * 100`, or 0 for an empty corpus.
    pub fn percentage(&self, count: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            count as f64 / self.total as f64 * 100.0
        }
    }

    /// Rows in report order: the five entity types then OUTSIDE.
    pub fn rows(&self) -> Vec<(&'static str, usize, f64)> {
        let mut rows: Vec<_> = Entity::ALL
            .iter()
            .map(|&e| (e.long_name(), self.count(e), self.percentage(self.count(e))))
            .collect();
        rows.push(("OUTSIDE", self.outside, self.percentage(self.outside)));
        rows
    }
}

pub fn corpus_stats(corpus: &Corpus) -> EntityDistribution {
    let mut dist = EntityDistribution { entity_counts: [0; 5], outside: 0, total: 0 };
    for token in corpus.sentences.iter().flat_map(|s| &s.tokens) {
        match token.tag.entity() {
            Some(e) => dist.entity_counts[e.index()] += 1,
            None => dist.outside += 1,
        }
        dist.total += 1;
    }
    dist
}

/// Deterministic permutation of `0..n`.
///
/// The generator is ChaCha8 seeded through `SeedableRng::seed_from_u64`
/// (rand_core 0.9). The shuffle is Durstenfeld's Fisher-Yates: for `i` from
/// `n - 1` down to `1`, draw `j = next_u64() % (i + 1)` and swap `i` and `j`.
pub fn seeded_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    order
}

fn pick(corpus: &Corpus, indices: &[usize]) -> Corpus {
    Corpus {
        sentences: indices.iter().map(|&i| corpus.sentences[i].clone()).collect(),
        provenance: corpus.provenance.clone(),
    }
}

/// Shuffles sentences and gives the first `round(fraction * n)` to training.
/// The train size is clamped to `[1, n - 1]` so neither side is empty.
pub fn split_holdout(corpus: &Corpus, train_fraction: f64, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(train_fraction));
    }
    let n = corpus.len();
    if n < 2 {
        return Err(CorpusError::TooFewSentences(n));
    }
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let order = seeded_permutation(n, seed);
    Ok((pick(corpus, &order[..n_train]), pick(corpus, &order[n_train..])))
}

/// Sizes of `k` balanced folds over `n` items; the first `n % k` folds get
/// one extra item.
pub fn fold_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// Sentence indices (into the original corpus) of each test fold.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, CorpusError> {
    if k < 2 || k > n {
        return Err(CorpusError::InvalidFoldCount { k, sentences: n });
    }
    let order = seeded_permutation(n, seed);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for size in fold_sizes(n, k) {
        folds.push(order[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// `k` (train, test) pairs; fold `i`'s test set is the `i`-th slice of the
/// shuffled corpus and its train set is every other slice in shuffled order.
pub fn split_kfold(corpus: &Corpus, k: usize, seed: u64) -> Result<Vec<(Corpus, Corpus)>, CorpusError> {
    let folds = kfold_indices(corpus.len(), k, seed)?;
    Ok((0..k)
        .map(|i| {
            let train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, f)| f.iter().copied())
                .collect();
            (pick(corpus, &train), pick(corpus, &folds[i]))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(tags: &[&str]) -> Sentence {
        let pairs: Vec<(String, &str)> = tags.iter().enumerate().map(|(i, t)| (format!("w{i}"), *t)).collect();
        Sentence::from_pairs(&pairs).unwrap()
    }

    fn numbered(n: usize) -> Corpus {
        Corpus::new((0..n).map(|i| Sentence::untagged(&[format!("s{i}")]).unwrap()).collect())
    }

    #[test]
    fn scheme_has_eleven_labels_with_round_trip_text() {
        assert_eq!(Label::SCHEME.len(), 11);
        for (i, l) in Label::SCHEME.iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(l.to_string().parse::<Label>().unwrap(), *l);
        }
        assert_eq!(Label::B(Entity::Per).to_string(), "B-PER");
    }

    #[test]
    fn tags_are_case_sensitive() {
        assert!("b-PER".parse::<Label>().is_err());
        assert!("B-per".parse::<Label>().is_err());
        assert!("B-".parse::<Label>().is_err());
        assert!("o".parse::<Label>().is_err());
    }

    #[test]
    fn parse_minimal_file() {
        let c = parse_conll("Aga B-PER\n. O\n").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.token_count(), 2);
        assert_eq!(c.sentences()[0].tokens()[0].surface(), "Aga");
        assert_eq!(c.sentences()[0].tokens()[0].tag, Label::B(Entity::Per));
    }

    #[test]
    fn parse_empty() {
        let c = parse_conll("").unwrap();
        assert!(c.is_empty());
        assert_eq!(parse_conll("\n\n  \n").unwrap().len(), 0);
    }

    #[test]
    fn parse_collapses_blank_runs_and_accepts_crlf_and_tabs() {
        let c = parse_conll("a\tO\r\n\r\n\r\n\nb  B-LOC\r\nc \t I-LOC\n\n\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.sentences()[1].tags(), vec![Label::B(Entity::Loc), Label::I(Entity::Loc)]);
    }

    #[test]
    fn parse_reports_column_errors_with_line() {
        let err = parse_conll("a O\nb\n").unwrap_err();
        assert_eq!(err, CorpusError::ColumnCount { line: 2, found: 1 });
        let err = parse_conll("a O\n\nx y z\n").unwrap_err();
        assert_eq!(err, CorpusError::ColumnCount { line: 3, found: 3 });
    }

    #[test]
    fn parse_reports_unknown_tag() {
        let err = parse_conll("a O\nb B-FOO\n").unwrap_err();
        assert_eq!(err, CorpusError::UnknownTag { line: 2, tag: "B-FOO".into() });
        assert!(err.to_string().contains("B-FOO"));
    }

    #[test]
    fn serialize_single_token() {
        let c = Corpus::new(vec![sent(&["B-PER"])]);
        assert_eq!(serialize_conll(&c), "w0 B-PER\n");
        let c = Corpus::new(vec![Sentence::from_pairs(&[("Aga", "B-PER")]).unwrap()]);
        assert_eq!(serialize_conll(&c), "Aga B-PER\n");
    }

    #[test]
    fn serialize_two_sentences_has_one_blank_line() {
        let c = Corpus::new(vec![sent(&["O", "O"]), sent(&["B-LOC"])]);
        let text = serialize_conll(&c);
        assert_eq!(text.lines().filter(|l| l.is_empty()).count(), 1);
        assert!(text.ends_with('\n'));
        assert_eq!(parse_conll(&text).unwrap(), c);
    }

    #[test]
    fn validate_examples() {
        let v = validate_bio(&Corpus::new(vec![sent(&["B-LOC", "I-PER"])]));
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].sentence, v[0].token), (0, 1));
        assert!(validate_bio(&Corpus::new(vec![sent(&["B-PER", "I-PER", "O"])])).is_empty());
        let v = validate_bio(&Corpus::new(vec![sent(&["I-ORG", "O"])]));
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].token, 0);
    }

    #[test]
    fn repair_examples() {
        let fix = |tags: &[&str]| repair_bio(&Corpus::new(vec![sent(tags)])).sentences()[0].tags();
        assert_eq!(fix(&["O", "I-PER"]), vec![Label::O, Label::B(Entity::Per)]);
        assert_eq!(
            fix(&["B-LOC", "I-PER", "I-PER"]),
            vec![Label::B(Entity::Loc), Label::B(Entity::Per), Label::I(Entity::Per)]
        );
        let ok = Corpus::new(vec![sent(&["B-PER", "I-PER", "O"])]);
        assert_eq!(repair_bio(&ok), ok);
    }

    #[test]
    fn stats_examples() {
        let all_o = Corpus::new(vec![sent(&["O"; 10])]);
        let d = corpus_stats(&all_o);
        assert_eq!((d.outside, d.total), (10, 10));
        assert_eq!(d.percentage(d.outside), 100.0);

        let d = corpus_stats(&Corpus::new(vec![sent(&["B-PER", "I-PER", "O"])]));
        assert_eq!(d.count(Entity::Per), 2);
        assert_eq!(d.outside, 1);
        assert!((d.percentage(2) - 66.6667).abs() < 1e-3);
        assert!((d.percentage(1) - 33.3333).abs() < 1e-3);
    }

    #[test]
    fn final_period_lint() {
        let c = parse_conll("a O\n. O\n\nb O\n").unwrap();
        assert_eq!(lint_final_period(&c), vec![1]);
    }

    #[test]
    fn holdout_counts_and_determinism() {
        let c = numbered(10);
        let (tr, te) = split_holdout(&c, 0.7, 42).unwrap();
        assert_eq!((tr.len(), te.len()), (7, 3));
        let (tr2, te2) = split_holdout(&c, 0.7, 42).unwrap();
        assert_eq!((tr, te), (tr2, te2));

        let (tr, te) = split_holdout(&numbered(2534), 0.8, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (2027, 507));
    }

    #[test]
    fn holdout_rejects_bad_inputs() {
        assert!(matches!(split_holdout(&numbered(10), 1.0, 0), Err(CorpusError::InvalidFraction(_))));
        assert!(matches!(split_holdout(&numbered(10), 0.0, 0), Err(CorpusError::InvalidFraction(_))));
        assert!(matches!(split_holdout(&numbered(1), 0.5, 0), Err(CorpusError::TooFewSentences(1))));
    }

    #[test]
    fn kfold_examples() {
        let folds = split_kfold(&numbered(10), 10, 3).unwrap();
        assert_eq!(folds.len(), 10);
        assert!(folds.iter().all(|(tr, te)| te.len() == 1 && tr.len() == 9));

        // 23 = 3*3 + 7*2
        let sizes: Vec<usize> = split_kfold(&numbered(23), 10, 3).unwrap().iter().map(|(_, te)| te.len()).collect();
        assert_eq!(sizes, vec![3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);

        assert!(split_kfold(&numbered(5), 1, 0).is_err());
        assert!(split_kfold(&numbered(5), 6, 0).is_err());
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut p = seeded_permutation(100, 9);
        p.sort_unstable();
        assert_eq!(p, (0..100).collect::<Vec<_>>());
        assert_ne!(seeded_permutation(100, 9), seeded_permutation(100, 10));
    }
}
