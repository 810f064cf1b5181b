//! `DTM1` container: a document-term matrix together with its vocabulary.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic        4 bytes  "DTM1"
//! m            u64      document count
//! n            u64      term count
//! nnz          u64      stored entries
//! weighting    u8       0 = TF, 1 = TF-IDF
//! normalized   u8       0 or 1
//! terms        n UTF-8 lines, each terminated by '\n'
//! doc_freq     n × u64
//! row_len      m × u64  entries per row
//! entries      nnz × (u32 term index, f64 weight), row-major, ascending index
//! ```

use std::io::{BufRead, Read, Write};

use super::matrix::{DocTermMatrix, Weighting};
use super::vocab::Vocabulary;
use crate::error::{Result, SomError};

pub const DTM_MAGIC: &[u8; 4] = b"DTM1";

#[derive(Debug, Clone, PartialEq)]
pub struct DtmFile {
    pub matrix: DocTermMatrix,
    pub vocabulary: Vocabulary,
}

pub fn write_dtm<W: Write>(mut w: W, matrix: &DocTermMatrix, vocab: &Vocabulary) -> Result<()> {
    if vocab.len() != matrix.n_cols() {
        return Err(SomError::DimensionMismatch {
            expected: matrix.n_cols(),
            got: vocab.len(),
        });
    }
    w.write_all(DTM_MAGIC)?;
    w.write_all(&(matrix.n_rows() as u64).to_le_bytes())?;
    w.write_all(&(matrix.n_cols() as u64).to_le_bytes())?;
    w.write_all(&(matrix.nnz() as u64).to_le_bytes())?;
    w.write_all(&[
        match matrix.weighting() {
            Weighting::Tf => 0,
            Weighting::Tfidf => 1,
        },
        matrix.is_normalized() as u8,
    ])?;
    for term in vocab.terms() {
        if term.contains('\n') {
            return Err(SomError::format("DTM1", format!("term {term:?} contains a newline")));
        }
        w.write_all(term.as_bytes())?;
        w.write_all(b"\n")?;
    }
    for &df in vocab.doc_frequency() {
        w.write_all(&(df as u64).to_le_bytes())?;
    }
    for pair in matrix.raw_row_ptr().windows(2) {
        w.write_all(&((pair[1] - pair[0]) as u64).to_le_bytes())?;
    }
    for r in 0..matrix.n_rows() {
        let (idx, val) = matrix.row(r);
        for (&c, &v) in idx.iter().zip(val) {
            w.write_all(&c.to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_dtm<R: BufRead>(mut r: R) -> Result<DtmFile> {
    let bad = |why: &str| SomError::format("DTM1", why);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DTM_MAGIC {
        return Err(bad("bad magic"));
    }
    let m = read_u64(&mut r)? as usize;
    let n = read_u64(&mut r)? as usize;
    let nnz = read_u64(&mut r)? as usize;
    let mut flags = [0u8; 2];
    r.read_exact(&mut flags)?;
    let weighting = match flags[0] {
        0 => Weighting::Tf,
        1 => Weighting::Tfidf,
        _ => return Err(bad("unknown weighting tag")),
    };
    let normalized = match flags[1] {
        0 => false,
        1 => true,
        _ => return Err(bad("bad normalized flag")),
    };

    let mut terms = Vec::with_capacity(n);
    let mut line = Vec::new();
    for _ in 0..n {
        line.clear();
        r.read_until(b'\n', &mut line)?;
        if line.pop() != Some(b'\n') {
            return Err(bad("truncated vocabulary"));
        }
        terms.push(String::from_utf8(line.clone()).map_err(|_| bad("term is not UTF-8"))?);
    }
    let doc_frequency = (0..n)
        .map(|_| read_u64(&mut r).map(|v| v as usize))
        .collect::<Result<Vec<_>>>()?;
    let vocabulary = Vocabulary::from_parts(terms, doc_frequency)?;

    let mut row_ptr = Vec::with_capacity(m + 1);
    row_ptr.push(0usize);
    for _ in 0..m {
        let len = read_u64(&mut r)? as usize;
        row_ptr.push(row_ptr.last().unwrap() + len);
    }
    if *row_ptr.last().unwrap() != nnz {
        return Err(bad("row lengths do not sum to nnz"));
    }
    let mut indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    let mut buf = [0u8; 12];
    for _ in 0..nnz {
        r.read_exact(&mut buf)?;
        let c = u32::from_le_bytes(buf[..4].try_into().unwrap());
        let v = f64::from_le_bytes(buf[4..].try_into().unwrap());
        if c as usize >= n {
            return Err(bad("term index out of range"));
        }
        if !(v.is_finite() && v > 0.0) {
            return Err(bad("stored weight is not finite and positive"));
        }
        indices.push(c);
        values.push(v);
    }
    for span in row_ptr.windows(2) {
        if indices[span[0]..span[1]].windows(2).any(|p| p[0] >= p[1]) {
            return Err(bad("row indices not strictly ascending"));
        }
    }
    if r.read(&mut [0u8])? != 0 {
        return Err(bad("trailing bytes"));
    }
    let matrix = DocTermMatrix::from_raw_parts(n, row_ptr, indices, values, weighting, normalized);
    Ok(DtmFile { matrix, vocabulary })
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}
