//! Complaint ingestion and document-term matrix construction.

mod dtm_file;
mod matrix;
mod tokenize;
mod vocab;

use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

pub use dtm_file::{read_dtm, write_dtm, DtmFile, DTM_MAGIC};
pub use matrix::{idf, l2_normalize, tf_matrix, tfidf_matrix, DocTermMatrix, Weighting};
pub use tokenize::{default_stopwords, parse_stopwords, stem, tokenize, TokenizerConfig};
pub use vocab::Vocabulary;

use crate::error::{Result, SomError};

/// Human-assigned complaint grade, stored as 1 or 2 on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Severity {
    Moderate = 1,
    Severe = 2,
}

impl TryFrom<u8> for Severity {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Severity::Moderate),
            2 => Ok(Severity::Severe),
            other => Err(format!("severity must be 1 or 2, got {other}")),
        }
    }
}

impl From<Severity> for u8 {
    fn from(s: Severity) -> u8 {
        s as u8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<Severity>,
}

/// Parses one document per nonblank line. Errors name the 1-based line number.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line)
            .map_err(|e| SomError::InvalidDocument(format!("line {lineno}: {e}")))?;
        if doc.id.is_empty() {
            return Err(SomError::InvalidDocument(format!("line {lineno}: empty id")));
        }
        if !ids.insert(doc.id.clone()) {
            return Err(SomError::InvalidDocument(format!(
                "line {lineno}: duplicate id {:?}",
                doc.id
            )));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// A tokenized corpus: the persisted output of the ingest stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<CorpusEntry>,
    pub vocabulary: Vocabulary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub severity: Option<Severity>,
    pub tokens: Vec<String>,
}

impl Corpus {
    pub fn from_documents(docs: &[Document], config: &TokenizerConfig) -> Result<Self> {
        let documents: Vec<CorpusEntry> = docs
            .iter()
            .map(|d| CorpusEntry {
                id: d.id.clone(),
                severity: d.severity,
                tokens: tokenize(&d.text, config),
            })
            .collect();
        let token_lists: Vec<&[String]> = documents.iter().map(|d| d.tokens.as_slice()).collect();
        let vocabulary = Vocabulary::build(&token_lists)?;
        Ok(Self {
            documents,
            vocabulary,
        })
    }

    pub fn token_lists(&self) -> Vec<&[String]> {
        self.documents.iter().map(|d| d.tokens.as_slice()).collect()
    }

    pub fn severities(&self) -> Vec<Option<Severity>> {
        self.documents.iter().map(|d| d.severity).collect()
    }

    /// Builds the weighted matrix, then L2-normalizes it. Returns the matrix and
    /// the count of rows left all-zero.
    pub fn document_term_matrix(&self, weighting: Weighting) -> Result<(DocTermMatrix, usize)> {
        let tf = tf_matrix(&self.token_lists(), &self.vocabulary)?;
        let weighted = match weighting {
            Weighting::Tf => tf,
            Weighting::Tfidf => tfidf_matrix(&tf, &self.vocabulary)?,
        };
        Ok(l2_normalize(&weighted))
    }
}
