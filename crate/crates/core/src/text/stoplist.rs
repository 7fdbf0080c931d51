//! Corpus-specific stop lists.
//!
//! Stop-list files store surface words; filtering happens after lemmatization
//! at the term level, through the image of those words under the active term
//! map. `stoplist_candidates` ranks terms by ascending entropy global weight
//! so a human can skim the least informative ones into a list.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::lemma::{TermId, TermMap};
use crate::vsm::{entropy_weights, TermDocMatrix};

/// A set of stop words plus the terms they map to.
#[derive(Debug, Clone, Default)]
pub struct StopList {
    words: BTreeSet<String>,
}

impl StopList {
    /// The empty stop list (filtering disabled).
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        StopList {
            words: words.into_iter().map(Into::into).collect(),
        }
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in lexicographic order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    /// Image of the stop words under `map`: the term identifiers to filter.
    /// Words unknown to the map contribute nothing.
    pub fn term_set(&self, map: &TermMap) -> HashSet<TermId> {
        self.words.iter().filter_map(|w| map.term_of(w)).collect()
    }

    /// Parses a stop-list file: one word per line, `#` comments allowed.
    pub fn parse(text: &str, path: &str) -> Result<StopList> {
        let mut words = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.chars().any(char::is_whitespace) {
                return Err(Error::parse(path, idx + 1, "expected one word per line"));
            }
            words.insert(line.to_string());
        }
        Ok(StopList { words })
    }

    pub fn load(path: &Path) -> Result<StopList> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        StopList::parse(&text, &path.display().to_string())
    }

    /// Writes the list one word per line, lexicographically sorted.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for w in &self.words {
            writeln!(out, "{w}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("in-memory write");
        fs::write(path, buf).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// The `n` terms with the smallest entropy global weight, ascending, ties
/// broken lexicographically by representative. Asking for more terms than the
/// matrix has returns them all. Human filtering happens downstream.
pub fn stoplist_candidates(matrix: &TermDocMatrix, n: usize) -> Result<Vec<(String, f64)>> {
    let weights = entropy_weights(matrix)?;
    let mut ranked: Vec<(String, f64)> = (0..matrix.n_terms())
        .map(|i| (matrix.term_label(i).to_string(), weights.get(i)))
        .collect();
    ranked.sort_by(|(wa, ea), (wb, eb)| {
        ea.partial_cmp(eb)
            .expect("entropy weights are finite")
            .then_with(|| wa.cmp(wb))
    });
    ranked.truncate(n);
    Ok(ranked)
}
