//! Sparse term-by-document counts and the configurable weighting pipeline.
//!
//! Counting is exact integer arithmetic; weighting produces double-precision
//! reals. The weighting pipeline order is fixed: frequency normalization,
//! then document normalization, then the local function, then the global
//! weight. Zero entries stay zero through every step.

pub mod corpus;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use crate::error::{Error, Result};
use crate::text::lemma::TermMap;
use crate::text::StopList;

pub use corpus::{parse_corpus, Corpus, Document};

/// Sparse term-by-document frequency counts.
///
/// Rows are terms (lexicographically ordered representatives), columns are
/// documents in corpus order. Only strictly positive counts are stored.
#[derive(Debug, Clone)]
pub struct TermDocMatrix {
    terms: Vec<String>,
    term_rows: HashMap<String, usize>,
    docs: Vec<String>,
    /// per document: (row, count), sorted by row
    cols: Vec<Vec<(usize, u32)>>,
    nnz: usize,
}

impl TermDocMatrix {
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// Fraction of stored entries, `nnz / (T * D)`.
    pub fn density(&self) -> f64 {
        self.nnz as f64 / (self.n_terms() as f64 * self.n_docs() as f64)
    }

    pub fn term_label(&self, row: usize) -> &str {
        &self.terms[row]
    }

    pub fn term_labels(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_labels(&self) -> &[String] {
        &self.docs
    }

    pub fn row_of_term(&self, term: &str) -> Option<usize> {
        self.term_rows.get(term).copied()
    }

    pub fn count(&self, row: usize, doc: usize) -> u32 {
        match self.cols[doc].binary_search_by_key(&row, |&(r, _)| r) {
            Ok(pos) => self.cols[doc][pos].1,
            Err(_) => 0,
        }
    }

    pub fn column(&self, doc: usize) -> &[(usize, u32)] {
        &self.cols[doc]
    }

    /// Total frequency of a term over all documents.
    pub fn row_total(&self, row: usize) -> u64 {
        self.cols
            .iter()
            .flat_map(|col| col.iter())
            .filter(|&&(r, _)| r == row)
            .map(|&(_, f)| f as u64)
            .sum()
    }

    /// Builds a matrix from dense rows of counts; rows summing to zero are
    /// dropped. Meant for fixtures and tests.
    pub fn from_dense_counts(
        terms: Vec<String>,
        docs: Vec<String>,
        rows: &[Vec<u32>],
    ) -> Result<TermDocMatrix> {
        assert_eq!(terms.len(), rows.len(), "one label per row");
        let n_docs = docs.len();
        let mut kept: Vec<(String, &Vec<u32>)> = terms
            .into_iter()
            .zip(rows.iter())
            .filter(|(_, row)| {
                assert_eq!(row.len(), n_docs, "one count per document");
                row.iter().any(|&f| f > 0)
            })
            .collect();
        kept.sort_by(|(a, _), (b, _)| a.cmp(b));

        let mut cols: Vec<Vec<(usize, u32)>> = vec![Vec::new(); n_docs];
        let mut nnz = 0;
        for (row_idx, (_, row)) in kept.iter().enumerate() {
            for (j, &f) in row.iter().enumerate() {
                if f > 0 {
                    cols[j].push((row_idx, f));
                    nnz += 1;
                }
            }
        }
        let terms: Vec<String> = kept.into_iter().map(|(t, _)| t).collect();
        if terms.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        let term_rows = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(TermDocMatrix {
            terms,
            term_rows,
            docs,
            cols,
            nnz,
        })
    }

    /// Debug dump in triplet form: header `T D nnz`, then one
    /// `term_index doc_index value` line per stored entry (0-based indices).
    pub fn dump_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.n_terms(), self.n_docs(), self.nnz)?;
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, f) in col {
                writeln!(out, "{i} {j} {f}")?;
            }
        }
        Ok(())
    }
}

/// Counts lemmatized, stop-filtered term frequencies per document.
///
/// Terms that never occur are not given rows. Documents whose every token is
/// stopped or unmapped keep their (all-zero) column so indices stay aligned
/// with the corpus; a warning is logged for each.
pub fn count_matrix(
    corpus: &Corpus,
    term_map: &TermMap,
    stoplist: &StopList,
    use_titles: bool,
) -> Result<TermDocMatrix> {
    let stop_terms = stoplist.term_set(term_map);
    let mut doc_bags: Vec<BTreeMap<String, u32>> = Vec::with_capacity(corpus.n_docs());
    for (j, doc) in corpus.documents.iter().enumerate() {
        let mut bag: BTreeMap<String, u32> = BTreeMap::new();
        for word in doc.tokens(use_titles) {
            let Some(term) = term_map.term_of(&word) else {
                continue;
            };
            if stop_terms.contains(&term) {
                continue;
            }
            *bag.entry(term_map.representative(term).to_string())
                .or_insert(0) += 1;
        }
        if bag.is_empty() {
            log::warn!(
                "document {} of corpus {} is empty after lemmatization and stop filtering",
                j,
                corpus.name
            );
        }
        doc_bags.push(bag);
    }

    let mut terms: Vec<String> = doc_bags
        .iter()
        .flat_map(|bag| bag.keys().cloned())
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    terms.sort();
    if terms.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let term_rows: HashMap<String, usize> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();

    let mut cols = Vec::with_capacity(doc_bags.len());
    let mut nnz = 0;
    for bag in &doc_bags {
        let mut col: Vec<(usize, u32)> = bag
            .iter()
            .map(|(term, &f)| (term_rows[term], f))
            .collect();
        col.sort_by_key(|&(r, _)| r);
        nnz += col.len();
        cols.push(col);
    }

    let docs = (0..corpus.n_docs()).map(|j| format!("d{j:04}")).collect();
    Ok(TermDocMatrix {
        terms,
        term_rows,
        docs,
        cols,
        nnz,
    })
}

/// Entropy global weights, one per term row, each within `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GlobalWeights(Vec<f64>);

impl GlobalWeights {
    pub fn get(&self, row: usize) -> f64 {
        self.0[row]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// One minus the normalized entropy of each term's distribution over
/// documents: 1 for a term confined to a single document, 0 for a term spread
/// uniformly over all of them. Independent of the logarithm base.
pub fn entropy_weights(matrix: &TermDocMatrix) -> Result<GlobalWeights> {
    let d = matrix.n_docs();
    if d < 2 {
        return Err(Error::EntropySingleDocument);
    }
    let log_d = (d as f64).ln();

    let mut totals = vec![0u64; matrix.n_terms()];
    for col in &matrix.cols {
        for &(row, f) in col {
            totals[row] += f as u64;
        }
    }
    // sum of p ln p per row; the 0 ln 0 terms contribute nothing
    let mut plogp = vec![0.0f64; matrix.n_terms()];
    for col in &matrix.cols {
        for &(row, f) in col {
            let p = f as f64 / totals[row] as f64;
            plogp[row] += p * p.ln();
        }
    }
    let weights = plogp.iter().map(|&s| 1.0 + s / log_d).collect();
    Ok(GlobalWeights(weights))
}

/// Entropy weight of a single frequency profile (used for the three-answer
/// micro-collection). `0 ln 0` counts as zero; all-zero input is an error.
pub fn entropy_weight_of_profile(freqs: &[u32]) -> Result<f64> {
    if freqs.len() < 2 {
        return Err(Error::EntropySingleDocument);
    }
    let total: u64 = freqs.iter().map(|&f| f as u64).sum();
    if total == 0 {
        return Err(Error::NoCorpusTerms);
    }
    let log_d = (freqs.len() as f64).ln();
    let mut acc = 0.0;
    for &f in freqs {
        if f > 0 {
            let p = f as f64 / total as f64;
            acc += p * p.ln();
        }
    }
    Ok(1.0 + acc / log_d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalWeighting {
    /// `log(1 + f)` with the natural logarithm.
    Log1p,
    /// Keep the (possibly normalized) frequency as is.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlobalWeighting {
    Entropy,
    None,
}

/// Switches of the weighting pipeline.
///
/// The default is the best-scoring setting: no frequency normalization, no
/// document normalization, local `log(1+f)`, global entropy. Title usage is a
/// per-corpus choice and defaults to off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightingConfig {
    pub use_titles: bool,
    pub frequency_normalization: bool,
    pub local: LocalWeighting,
    pub global: GlobalWeighting,
    pub document_normalization: bool,
}

impl Default for WeightingConfig {
    fn default() -> Self {
        WeightingConfig {
            use_titles: false,
            frequency_normalization: false,
            local: LocalWeighting::Log1p,
            global: GlobalWeighting::Entropy,
            document_normalization: false,
        }
    }
}

/// Real-valued weighted matrix sharing the count matrix's sparsity pattern.
#[derive(Debug, Clone)]
pub struct WeightedMatrix {
    terms: Vec<String>,
    term_rows: HashMap<String, usize>,
    docs: Vec<String>,
    cols: Vec<Vec<(usize, f64)>>,
}

impl WeightedMatrix {
    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn term_labels(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_labels(&self) -> &[String] {
        &self.docs
    }

    pub fn row_of_term(&self, term: &str) -> Option<usize> {
        self.term_rows.get(term).copied()
    }

    pub fn get(&self, row: usize, doc: usize) -> f64 {
        match self.cols[doc].binary_search_by_key(&row, |&(r, _)| r) {
            Ok(pos) => self.cols[doc][pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn column(&self, doc: usize) -> &[(usize, f64)] {
        &self.cols[doc]
    }

    pub fn is_zero(&self) -> bool {
        self.cols
            .iter()
            .all(|col| col.iter().all(|&(_, v)| v == 0.0))
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut dense = nalgebra::DMatrix::zeros(self.n_terms(), self.n_docs());
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                dense[(i, j)] = v;
            }
        }
        dense
    }
}

/// Applies the weighting pipeline to a count matrix.
///
/// Steps, in order: column sums normalized to 1 (empirical probabilities) if
/// `frequency_normalization`; columns scaled to unit Euclidean norm if
/// `document_normalization`; the local function elementwise; row scaling by
/// the entropy weight when `global` is entropy. All-zero columns pass through
/// unchanged (with a warning when a normalization asked for them).
pub fn weight_matrix(matrix: &TermDocMatrix, config: &WeightingConfig) -> Result<WeightedMatrix> {
    let global = match config.global {
        GlobalWeighting::Entropy => Some(entropy_weights(matrix)?),
        GlobalWeighting::None => None,
    };

    let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(matrix.n_docs());
    for (j, col) in matrix.cols.iter().enumerate() {
        let mut values: Vec<(usize, f64)> =
            col.iter().map(|&(i, f)| (i, f as f64)).collect();

        if col.is_empty() && (config.frequency_normalization || config.document_normalization) {
            log::warn!("document column {j} is all zeros; normalization left it unchanged");
        }
        if config.frequency_normalization {
            let sum: f64 = values.iter().map(|&(_, v)| v).sum();
            if sum > 0.0 {
                for (_, v) in &mut values {
                    *v /= sum;
                }
            }
        }
        if config.document_normalization {
            let norm = values
                .iter()
                .map(|&(_, v)| v * v)
                .sum::<f64>()
                .sqrt();
            if norm > 0.0 {
                for (_, v) in &mut values {
                    *v /= norm;
                }
            }
        }
        match config.local {
            LocalWeighting::Log1p => {
                for (_, v) in &mut values {
                    *v = v.ln_1p();
                }
            }
            LocalWeighting::Raw => {}
        }
        if let Some(weights) = &global {
            for (i, v) in &mut values {
                *v *= weights.get(*i);
            }
        }
        cols.push(values);
    }

    Ok(WeightedMatrix {
        terms: matrix.terms.clone(),
        term_rows: matrix.term_rows.clone(),
        docs: matrix.docs.clone(),
        cols,
    })
}
