//! Text normalization: lowercase, alphabetic-only tokens, length and stopword
//! filtering, and an optional light suffix stemmer.

use std::collections::HashSet;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// Suffixes stripped by the light stemmer, tried in order; at most one is removed.
const STEM_SUFFIXES: [&str; 3] = ["ing", "ed", "s"];

#[derive(Debug, Clone)]
pub struct TokenizerConfig {
    pub stopwords: HashSet<String>,
    pub min_token_len: usize,
    pub stem: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            stopwords: default_stopwords(),
            min_token_len: 3,
            stem: false,
        }
    }
}

impl TokenizerConfig {
    pub fn with_stopwords<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            stopwords: words.into_iter().map(|w| w.into().to_lowercase()).collect(),
            ..Self::default()
        }
    }
}

/// Parses a stopword list: one word per line, blank lines and `#` comments skipped.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

/// Splits `text` on every non-alphabetic character and applies the filters in
/// `config`. Output order follows the input.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|raw| !raw.is_empty())
        .filter_map(|raw| {
            let token = raw.to_lowercase();
            if token.chars().count() < config.min_token_len
                || config.stopwords.contains(&token)
            {
                return None;
            }
            Some(if config.stem { stem(&token) } else { token })
        })
        .collect()
}

/// Strips one trailing "ing", "ed" or "s" when at least three characters remain.
pub fn stem(token: &str) -> String {
    for suffix in STEM_SUFFIXES {
        if let Some(rest) = token.strip_suffix(suffix) {
            if rest.chars().count() >= 3 {
                return rest.to_string();
            }
        }
    }
    token.to_string()
}
