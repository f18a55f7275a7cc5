//! Raw-text cleanup for Sorani news text: character filtering, Latin-word
//! removal, digit conversion and sentence/word tokenization.

use std::collections::BTreeSet;

/// Sentence-final punctuation. Runs of these end a sentence.
pub const SENTENCE_DELIMITERS: [char; 4] = ['.', '؟', '!', '?'];

/// Arabic-Indic digits U+0660..U+0669.
pub const ARABIC_INDIC_DIGITS: [char; 10] = ['٠', '١', '٢', '٣', '٤', '٥', '٦', '٧', '٨', '٩'];
/// Extended Arabic-Indic (Persian-style) digits U+06F0..U+06F9.
pub const EXTENDED_ARABIC_INDIC_DIGITS: [char; 10] = ['۰', '۱', '۲', '۳', '۴', '۵', '۶', '۷', '۸', '۹'];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreprocessConfig {
    /// Target glyph for each ASCII digit, indexed by digit value.
    pub digit_map: [char; 10],
    pub strip_latin: bool,
    /// Characters deleted outright by [`clean_text`].
    pub unwanted_chars: BTreeSet<char>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            digit_map: ARABIC_INDIC_DIGITS,
            strip_latin: true,
            unwanted_chars: default_unwanted_chars(),
        }
    }
}

impl PreprocessConfig {
    /// `None` if the map is not injective.
    pub fn with_digit_map(mut self, digit_map: [char; 10]) -> Option<Self> {
        let distinct: BTreeSet<char> = digit_map.iter().copied().collect();
        if distinct.len() != 10 {
            return None;
        }
        self.digit_map = digit_map;
        Some(self)
    }
}

/// Non-whitespace control characters, zero-width space/joiners
/// (U+200B..U+200D) and ASCII punctuation other than the sentence
/// delimiters.
pub fn default_unwanted_chars() -> BTreeSet<char> {
    let controls = (0u32..0x20).chain(0x7f..0xa0).filter_map(char::from_u32).filter(|c| !c.is_whitespace());
    let zero_width = ['\u{200B}', '\u{200C}', '\u{200D}'];
    let punct = (0x21u8..0x7f)
        .map(char::from)
        .filter(|c| c.is_ascii_punctuation() && !SENTENCE_DELIMITERS.contains(c));
    controls.chain(zero_width).chain(punct).collect()
}

fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Deletes unwanted characters, optionally drops Latin letters, then
/// collapses whitespace runs to single spaces and trims.
pub fn clean_text(raw: &str, config: &PreprocessConfig) -> String {
    let filtered: String = raw
        .chars()
        .filter(|c| !config.unwanted_chars.contains(c))
        .filter(|c| !(config.strip_latin && c.is_ascii_alphabetic()))
        .collect();
    normalize_whitespace(&filtered)
}

/// Replaces ASCII digits through the configured map.
pub fn convert_digits(text: &str, config: &PreprocessConfig) -> String {
    text.chars()
        .map(|c| match c.to_digit(10) {
            Some(d) if c.is_ascii_digit() => config.digit_map[d as usize],
            _ => c,
        })
        .collect()
}

fn is_delimiter(c: char) -> bool {
    SENTENCE_DELIMITERS.contains(&c)
}

/// Splits after each maximal run of sentence delimiters. Segments are
/// trimmed and empty ones dropped.
pub fn tokenize_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if is_delimiter(c) && !chars.peek().copied().is_some_and(is_delimiter) {
            push_trimmed(&mut out, &current);
            current.clear();
        }
    }
    push_trimmed(&mut out, &current);
    out
}

fn push_trimmed(out: &mut Vec<String>, segment: &str) {
    let s = segment.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

/// Whitespace split; trailing delimiters on the last word become separate
/// one-character tokens. Interior punctuation stays attached.
pub fn tokenize_words(sentence: &str) -> Vec<String> {
    let mut words: Vec<String> = sentence.split_whitespace().map(str::to_string).collect();
    let Some(last) = words.pop() else {
        return words;
    };
    let stem = last.trim_end_matches(is_delimiter);
    if !stem.is_empty() {
        words.push(stem.to_string());
    }
    words.extend(last[stem.len()..].chars().map(String::from));
    words
}

/// Full pipeline: clean, convert digits, split into sentences and words.
pub fn preprocess(raw: &str, config: &PreprocessConfig) -> Vec<Vec<String>> {
    let text = convert_digits(&clean_text(raw, config), config);
    tokenize_sentences(&text)
        .iter()
        .map(|s| tokenize_words(s))
        .filter(|w| !w.is_empty())
        .collect()
}
