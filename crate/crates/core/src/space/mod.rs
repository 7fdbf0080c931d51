//! Truncated singular spaces, pseudo-document fold-in, and similarity.
//!
//! One decomposition is computed per weighted matrix at its numerical rank;
//! every retained dimensionality is then realized by slicing the factors, so
//! a dimension scan never re-decomposes.

pub mod file;

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vsm::WeightedMatrix;

/// Relative threshold below which singular values count as numerically zero.
const RANK_TOLERANCE: f64 = 1e-10;

/// A truncated singular space: `U_k` (terms), `sigma` (descending positive
/// singular values), `V_k` (documents), together with the vocabulary that
/// labels the rows of `U_k`.
#[derive(Debug, Clone)]
pub struct SemanticSpace {
    terms: Vec<String>,
    term_rows: HashMap<String, usize>,
    docs: Vec<String>,
    u: DMatrix<f64>,
    sigma: DVector<f64>,
    v: DMatrix<f64>,
    rank: usize,
}

impl SemanticSpace {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    /// Numerical rank bound of the underlying decomposition.
    pub fn rank(&self) -> usize {
        self.rank
    }

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

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Document row `j` of `V_k` (the coordinates of training document `j`).
    pub fn doc_vector(&self, j: usize) -> DVector<f64> {
        self.v.row(j).transpose()
    }

    /// Rank-`k` slice of this space. Requests beyond the numerical rank are
    /// clamped with a warning; `k = 0` is rejected.
    pub fn truncate(&self, k: usize) -> Result<SemanticSpace> {
        if k == 0 {
            return Err(Error::BadDimension {
                k,
                reason: "dimensionality must be at least 1".into(),
            });
        }
        let k_eff = if k > self.k() {
            log::warn!(
                "requested k = {k} exceeds the numerical rank {}; clamped",
                self.k()
            );
            self.k()
        } else {
            k
        };
        Ok(SemanticSpace {
            terms: self.terms.clone(),
            term_rows: self.term_rows.clone(),
            docs: self.docs.clone(),
            u: self.u.columns(0, k_eff).into_owned(),
            sigma: DVector::from_iterator(k_eff, self.sigma.iter().take(k_eff).copied()),
            v: self.v.columns(0, k_eff).into_owned(),
            rank: self.rank,
        })
    }

    /// Frobenius error of the rank-`k` reconstruction against `dense`.
    pub fn reconstruction_error(&self, dense: &DMatrix<f64>) -> f64 {
        let approx = &self.u * DMatrix::from_diagonal(&self.sigma) * self.v.transpose();
        (dense - approx).norm()
    }

    pub(crate) fn from_parts(
        terms: Vec<String>,
        docs: Vec<String>,
        u: DMatrix<f64>,
        sigma: DVector<f64>,
        v: DMatrix<f64>,
        rank: usize,
    ) -> SemanticSpace {
        let term_rows = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        SemanticSpace {
            terms,
            term_rows,
            docs,
            u,
            sigma,
            v,
            rank,
        }
    }
}

/// Decomposes `weighted` at its full numerical rank. Singular values below
/// `1e-10` of the largest are dropped.
pub fn svd_full(weighted: &WeightedMatrix) -> Result<SemanticSpace> {
    if weighted.is_zero() {
        return Err(Error::EmptyMatrix);
    }
    let dense = weighted.to_dense();
    let svd = dense.svd(true, true);
    let u_full = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v requested");
    let values = svd.singular_values;

    let sigma_max = values[0];
    let rank = values
        .iter()
        .take_while(|&&s| s > RANK_TOLERANCE * sigma_max)
        .count();
    if rank == 0 {
        return Err(Error::EmptyMatrix);
    }

    Ok(SemanticSpace::from_parts(
        weighted.term_labels().to_vec(),
        weighted.doc_labels().to_vec(),
        u_full.columns(0, rank).into_owned(),
        DVector::from_iterator(rank, values.iter().take(rank).copied()),
        v_t.transpose().columns(0, rank).into_owned(),
        rank,
    ))
}

/// Best rank-`k` factorization of `weighted` (Eckart-Young optimal under the
/// Frobenius norm). `k` beyond the numerical rank is clamped with a warning.
pub fn svd_truncate(weighted: &WeightedMatrix, k: usize) -> Result<SemanticSpace> {
    svd_full(weighted)?.truncate(k)
}

/// A bag of words projected into a semantic space.
#[derive(Debug, Clone)]
pub struct PseudoDoc {
    vec: DVector<f64>,
    used: Vec<String>,
    dropped: Vec<String>,
    empty: bool,
}

impl PseudoDoc {
    pub fn coords(&self) -> &DVector<f64> {
        &self.vec
    }

    pub fn dim(&self) -> usize {
        self.vec.len()
    }

    /// Terms of the bag found in the space vocabulary.
    pub fn used_terms(&self) -> &[String] {
        &self.used
    }

    /// Words dropped because the space vocabulary does not hold them.
    pub fn dropped_words(&self) -> &[String] {
        &self.dropped
    }

    /// True when nothing of the bag survived vocabulary restriction (or the
    /// surviving weights were all zero). Similarity against such a
    /// pseudo-document is an error, not zero.
    pub fn is_empty(&self) -> bool {
        self.empty
    }
}

/// Projects a weighted bag of words: `q_hat = sigma^-1 * U_k^T * q`.
///
/// Terms absent from the space vocabulary are dropped and reported on the
/// returned pseudo-document.
pub fn fold_in(bow: &BTreeMap<String, f64>, space: &SemanticSpace) -> PseudoDoc {
    let k = space.k();
    let mut vec = DVector::zeros(k);
    let mut used = Vec::new();
    let mut dropped = Vec::new();
    for (term, &weight) in bow {
        match space.row_of_term(term) {
            Some(row) => {
                used.push(term.clone());
                if weight != 0.0 {
                    for c in 0..k {
                        vec[c] += weight * space.u[(row, c)];
                    }
                }
            }
            None => dropped.push(term.clone()),
        }
    }
    for c in 0..k {
        vec[c] /= space.sigma[c];
    }
    let empty = vec.norm() == 0.0;
    PseudoDoc {
        vec,
        used,
        dropped,
        empty,
    }
}

/// Cosine similarity, numerically clamped to `[-1, 1]`.
pub fn cosine(a: &PseudoDoc, b: &PseudoDoc) -> Result<f64> {
    if a.empty || b.empty {
        return Err(Error::UndefinedSimilarity);
    }
    let cos = a.vec.dot(&b.vec) / (a.vec.norm() * b.vec.norm());
    Ok(cos.clamp(-1.0, 1.0))
}

/// Vector angle in radians within `[0, pi]`.
pub fn angle(a: &PseudoDoc, b: &PseudoDoc) -> Result<f64> {
    Ok(cosine(a, b)?.acos())
}
