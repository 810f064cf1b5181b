use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SomError};

/// Sorted term list with document frequencies. Column `i` of every
/// document-term matrix built against this vocabulary is `terms[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_frequency: Vec<usize>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    terms: Vec<String>,
    doc_frequency: Vec<usize>,
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = SomError;

    fn try_from(r: VocabularyRepr) -> Result<Self> {
        Vocabulary::from_parts(r.terms, r.doc_frequency)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            terms: v.terms,
            doc_frequency: v.doc_frequency,
        }
    }
}

impl Vocabulary {
    /// Collects the sorted union of all tokens. Fails with `EmptyCorpus` when
    /// there is no token at all.
    pub fn build<L, S>(token_lists: &[L]) -> Result<Self>
    where
        L: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for list in token_lists {
            let mut seen: Vec<&str> = list.as_ref().iter().map(AsRef::as_ref).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        if df.is_empty() {
            return Err(SomError::EmptyCorpus);
        }
        let (terms, doc_frequency) = df.into_iter().map(|(t, c)| (t.to_string(), c)).unzip();
        Self::from_parts(terms, doc_frequency)
    }

    /// Rebuilds a vocabulary from stored columns, checking its invariants.
    pub fn from_parts(terms: Vec<String>, doc_frequency: Vec<usize>) -> Result<Self> {
        if terms.len() != doc_frequency.len() {
            return Err(SomError::DimensionMismatch {
                expected: terms.len(),
                got: doc_frequency.len(),
            });
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SomError::format("vocabulary", "terms not strictly sorted"));
        }
        if let Some(i) = doc_frequency.iter().position(|&d| d == 0) {
            return Err(SomError::InvalidFrequency {
                df: doc_frequency[i],
                n: terms.len(),
            });
        }
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(Self {
            terms,
            doc_frequency,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_frequency(&self) -> &[usize] {
        &self.doc_frequency
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }
}
