//! Tweet text cleaning and tokenization.
//!
//! [`preprocess`] applies, in order: NFC normalization, URL span removal,
//! mention removal, hashtag unwrapping, emoji/symbol removal, lowercasing,
//! splitting on anything that is not a letter or digit, and stop-word
//! filtering. There is no stemming.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const DEFAULT_ITALIAN: &str = include_str!("../resources/stopwords_it.txt");

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn empty() -> StopWords {
        StopWords::default()
    }

    /// The bundled Italian list (includes `rt`).
    pub fn italian() -> StopWords {
        StopWords::parse(DEFAULT_ITALIAN)
    }

    /// One word per line; blank lines and `#` comments are skipped.
    /// Entries are lowercased on the way in.
    pub fn parse(content: &str) -> StopWords {
        content
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<StopWords> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(StopWords::parse(&content))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for StopWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopWords(iter.into_iter().map(|s| s.as_ref().to_lowercase()).collect())
    }
}

/// Ordered tokens produced by [`preprocess`]: nonempty, lowercase,
/// letters and digits only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    /// Wraps tokens that are already clean (vocabulary fixtures, reloaded data).
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> TokenSequence {
        TokenSequence(tokens.into_iter().map(Into::into).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn join(&self, sep: &str) -> String {
        self.0.join(sep)
    }
}

impl<'a> IntoIterator for &'a TokenSequence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

fn is_url_span(span: &str) -> bool {
    span.contains("://") || span.get(..4).is_some_and(|p| p.eq_ignore_ascii_case("www."))
}

fn strip_urls(text: &str) -> String {
    text.split_whitespace()
        .filter(|span| !is_url_span(span))
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn strip_mentions(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '@' && chars.peek().copied().is_some_and(is_word_char) {
            while chars.peek().copied().is_some_and(is_word_char) {
                chars.next();
            }
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out
}

fn unwrap_hashtags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '#' && chars.peek().copied().is_some_and(is_word_char) {
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out
}

/// Symbol categories plus the pictograph, dingbat, variation-selector,
/// joiner and tag ranges that emoji sequences are built from.
pub fn is_emoji_or_symbol(c: char) -> bool {
    use GeneralCategory::*;
    if matches!(
        get_general_category(c),
        MathSymbol | CurrencySymbol | ModifierSymbol | OtherSymbol
    ) {
        return true;
    }
    matches!(
        c as u32,
        0x1F000..=0x1FAFF
            | 0x2600..=0x27BF
            | 0x2B00..=0x2BFF
            | 0xFE00..=0xFE0F
            | 0x200D
            | 0x20E3
            | 0xE0020..=0xE007F
    )
}

fn strip_symbols(text: &str) -> String {
    text.chars()
        .map(|c| if is_emoji_or_symbol(c) { ' ' } else { c })
        .collect()
}

pub fn preprocess(text: &str, stopwords: &StopWords) -> TokenSequence {
    let text: String = text.nfc().collect();
    let text = strip_urls(&text);
    let text = strip_mentions(&text);
    let text = unwrap_hashtags(&text);
    let text = strip_symbols(&text);
    // recompose: a few lowercase mappings decompose
    let text: String = text.to_lowercase().nfc().collect();
    TokenSequence(
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty() && !stopwords.contains(t))
            .map(str::to_owned)
            .collect(),
    )
}
