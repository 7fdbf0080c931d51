//! Tokenization of raw document text.
//!
//! Tokens are maximal runs of Unicode letters, lowercased. Everything else
//! (digits, punctuation, apostrophes, whitespace) separates tokens, so elided
//! clitics like `l'air` split into `l` and `air`.

use std::fmt;

/// A single lowercased text unit.
///
/// Invariants: non-empty, contains no whitespace, already lowercased.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// Splits `text` into lowercased letter-run tokens.
///
/// Deterministic and concatenation-stable: tokenizing `a + " " + b` yields the
/// concatenation of the two token sequences. Empty input yields no tokens.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut run = String::new();
    for ch in text.chars() {
        if ch.is_alphabetic() {
            for lc in ch.to_lowercase() {
                run.push(lc);
            }
        } else if !run.is_empty() {
            tokens.push(Token(std::mem::take(&mut run)));
        }
    }
    if !run.is_empty() {
        tokens.push(Token(run));
    }
    tokens
}

/// Convenience view of `tokenize` output as plain strings.
pub fn tokenize_words(text: &str) -> Vec<String> {
    tokenize(text).into_iter().map(Token::into_string).collect()
}
