use serde::{Deserialize, Serialize};

use super::vocab::Vocabulary;
use crate::error::{Result, SomError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Tf,
    Tfidf,
}

impl std::str::FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "tf" => Ok(Weighting::Tf),
            "tfidf" | "tf-idf" => Ok(Weighting::Tfidf),
            other => Err(format!("unknown weighting {other:?} (expected tf or tfidf)")),
        }
    }
}

/// Sparse m×n document-term matrix in compressed-row form.
///
/// Entries are strictly positive; zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    n_cols: usize,
    row_ptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    weighting: Weighting,
    normalized: bool,
}

impl DocTermMatrix {
    /// Builds a matrix from per-row `(column, weight)` lists. Zero weights are
    /// dropped, columns within a row are sorted, duplicate columns rejected.
    pub fn from_rows(
        n_cols: usize,
        rows: Vec<Vec<(usize, f64)>>,
        weighting: Weighting,
    ) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (k, &(col, w)) in row.iter().enumerate() {
                if col >= n_cols {
                    return Err(SomError::DimensionMismatch {
                        expected: n_cols,
                        got: col + 1,
                    });
                }
                if k > 0 && row[k - 1].0 == col {
                    return Err(SomError::InvalidShape(format!("duplicate column {col}")));
                }
                if !w.is_finite() || w < 0.0 {
                    return Err(SomError::InvalidShape(format!(
                        "weight {w} at column {col} is not a finite nonnegative number"
                    )));
                }
                if w > 0.0 {
                    indices.push(col as u32);
                    values.push(w);
                }
            }
            row_ptr.push(indices.len());
        }
        Ok(Self {
            n_cols,
            row_ptr,
            indices,
            values,
            weighting,
            normalized: false,
        })
    }

    /// Dense constructor, mostly for small numeric datasets and tests.
    /// Negative entries are rejected like in [`from_rows`](Self::from_rows).
    pub fn from_dense(rows: &[Vec<f64>], weighting: Weighting) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        let sparse = rows
            .iter()
            .map(|r| {
                if r.len() != n {
                    return Err(SomError::DimensionMismatch {
                        expected: n,
                        got: r.len(),
                    });
                }
                Ok(r.iter().copied().enumerate().collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(n, sparse, weighting)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Column indices and weights of row `r`.
    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_ptr[r] == self.row_ptr[r + 1]
    }

    /// Indices of rows holding at least one nonzero entry.
    pub fn nonzero_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| !self.row_is_zero(r)).collect()
    }

    pub fn row_norm(&self, r: usize) -> f64 {
        self.row(r).1.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Writes row `r` into a dense buffer of length `n_cols`, zeroing the rest.
    pub fn densify_row_into(&self, r: usize, out: &mut [f64]) {
        out.fill(0.0);
        let (idx, val) = self.row(r);
        for (&c, &v) in idx.iter().zip(val) {
            out[c as usize] = v;
        }
    }

    pub fn dense_row(&self, r: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        self.densify_row_into(r, &mut out);
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows()).map(|r| self.dense_row(r)).collect()
    }

    pub(crate) fn from_raw_parts(
        n_cols: usize,
        row_ptr: Vec<usize>,
        indices: Vec<u32>,
        values: Vec<f64>,
        weighting: Weighting,
        normalized: bool,
    ) -> Self {
        Self {
            n_cols,
            row_ptr,
            indices,
            values,
            weighting,
            normalized,
        }
    }

    pub(crate) fn raw_row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }
}

/// Raw term counts per document.
pub fn tf_matrix<L, S>(token_lists: &[L], vocab: &Vocabulary) -> Result<DocTermMatrix>
where
    L: AsRef<[S]>,
    S: AsRef<str>,
{
    let rows = token_lists
        .iter()
        .map(|tokens| {
            let mut counts: Vec<(usize, f64)> = Vec::new();
            let mut cols = tokens
                .as_ref()
                .iter()
                .map(|t| {
                    vocab
                        .index_of(t.as_ref())
                        .ok_or_else(|| SomError::UnknownTerm(t.as_ref().to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            cols.sort_unstable();
            for c in cols {
                match counts.last_mut() {
                    Some((last, n)) if *last == c => *n += 1.0,
                    _ => counts.push((c, 1.0)),
                }
            }
            Ok(counts)
        })
        .collect::<Result<Vec<_>>>()?;
    DocTermMatrix::from_rows(vocab.len(), rows, Weighting::Tf)
}

/// Inverse document frequency, natural log: `ln(n_docs / doc_frequency)`.
pub fn idf(doc_frequency: usize, n_docs: usize) -> Result<f64> {
    if doc_frequency == 0 || doc_frequency > n_docs {
        return Err(SomError::InvalidFrequency {
            df: doc_frequency,
            n: n_docs,
        });
    }
    Ok((n_docs as f64 / doc_frequency as f64).ln())
}

/// Scales every TF entry by its column's IDF. Terms present in every document
/// get weight zero and drop out of the sparsity pattern.
pub fn tfidf_matrix(tf: &DocTermMatrix, vocab: &Vocabulary) -> Result<DocTermMatrix> {
    if tf.weighting() != Weighting::Tf {
        return Err(SomError::InvalidShape("TF-IDF input must be TF-weighted".into()));
    }
    if vocab.len() != tf.n_cols() {
        return Err(SomError::DimensionMismatch {
            expected: tf.n_cols(),
            got: vocab.len(),
        });
    }
    let m = tf.n_rows();
    let weights = vocab
        .doc_frequency()
        .iter()
        .map(|&df| idf(df, m))
        .collect::<Result<Vec<_>>>()?;
    let rows = (0..m)
        .map(|r| {
            let (idx, val) = tf.row(r);
            idx.iter()
                .zip(val)
                .map(|(&c, &v)| (c as usize, v * weights[c as usize]))
                .collect()
        })
        .collect();
    DocTermMatrix::from_rows(tf.n_cols(), rows, Weighting::Tfidf)
}

/// Scales each nonzero row to unit L2 norm. Returns the normalized matrix and
/// the number of all-zero rows that were left untouched.
pub fn l2_normalize(matrix: &DocTermMatrix) -> (DocTermMatrix, usize) {
    let mut out = matrix.clone();
    let mut zero_rows = 0;
    for r in 0..out.n_rows() {
        let span = out.row_ptr[r]..out.row_ptr[r + 1];
        if span.is_empty() {
            zero_rows += 1;
            continue;
        }
        let norm = out.values[span.clone()]
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        for v in &mut out.values[span] {
            *v /= norm;
        }
    }
    out.normalized = true;
    (out, zero_rows)
}
