//! `SOM1` container for trained maps. Little-endian throughout.
//!
//! ```text
//! magic          4 bytes "SOM1"
//! version        u32     1
//! geometry       m u64, munits u64, pc1 f64, pc2 f64, r f64,
//!                size1 u64, size2 u64, nrows u64, ncols u64,
//!                mpd f64, num_iterations u64
//! schedule       alpha0 f64, sigma0 f64, iterations u64, decay f64, seed u64
//! codebook       dim u64, then nrows·ncols·dim f64 weights, unit-major
//! assignments    count u64, then count × (unit index u64, distance f64)
//! qe             f64
//! ```
//!
//! Engine tag and wall-clock time are run metadata and are not stored, so
//! identical runs on different engines produce identical files.

use std::io::{Read, Write};

use super::codebook::{BmuResult, Codebook};
use super::geometry::MapGeometry;
use super::schedule::TrainingSchedule;
use super::train::{Engine, TrainedMap};
use crate::error::{Result, SomError};

pub const SOM_MAGIC: &[u8; 4] = b"SOM1";
const VERSION: u32 = 1;

pub fn write_som<W: Write>(mut w: W, map: &TrainedMap) -> Result<()> {
    w.write_all(&encode(map))?;
    w.flush()?;
    Ok(())
}

/// Serializes the deterministic payload of a trained map.
pub fn encode(map: &TrainedMap) -> Vec<u8> {
    let g = &map.geometry;
    let s = &map.schedule;
    let cb = &map.codebook;
    let mut out = Vec::with_capacity(128 + cb.weights().len() * 8 + map.assignments.len() * 16);
    out.extend_from_slice(SOM_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [g.m as u64, g.munits as u64] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [g.pc1, g.pc2, g.r] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [g.size1, g.size2, g.nrows, g.ncols] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&g.mpd.to_le_bytes());
    out.extend_from_slice(&g.num_iterations.to_le_bytes());

    out.extend_from_slice(&s.alpha0.to_le_bytes());
    out.extend_from_slice(&s.sigma0.to_le_bytes());
    out.extend_from_slice(&s.iterations.to_le_bytes());
    out.extend_from_slice(&s.decay.to_le_bytes());
    out.extend_from_slice(&s.seed.to_le_bytes());

    out.extend_from_slice(&(cb.dim() as u64).to_le_bytes());
    for w in cb.weights() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&(map.assignments.len() as u64).to_le_bytes());
    for a in &map.assignments {
        out.extend_from_slice(&(a.index as u64).to_le_bytes());
        out.extend_from_slice(&a.distance.to_le_bytes());
    }
    out.extend_from_slice(&map.quantization_error.to_le_bytes());
    out
}

/// Reads a map back. The engine tag is unknown at this point and is reported
/// as `Serial`, with zero wall time.
pub fn read_som<R: Read>(mut r: R) -> Result<TrainedMap> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn decode(bytes: &[u8]) -> Result<TrainedMap> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4)? != SOM_MAGIC {
        return Err(SomError::format("SOM1", "bad magic"));
    }
    let version = u32::from_le_bytes(c.take(4)?.try_into().unwrap());
    if version != VERSION {
        return Err(SomError::format("SOM1", format!("unsupported version {version}")));
    }
    let m = c.usize()?;
    let munits = c.usize()?;
    let (pc1, pc2, r) = (c.f64()?, c.f64()?, c.f64()?);
    let (size1, size2, nrows, ncols) = (c.usize()?, c.usize()?, c.usize()?, c.usize()?);
    let mpd = c.f64()?;
    let num_iterations = c.u64()?;
    let geometry = MapGeometry {
        m,
        munits,
        pc1,
        pc2,
        r,
        size1,
        size2,
        nrows,
        ncols,
        mpd,
        num_iterations,
    };
    let schedule = TrainingSchedule {
        alpha0: c.f64()?,
        sigma0: c.f64()?,
        iterations: c.u64()?,
        decay: c.f64()?,
        seed: c.u64()?,
    };
    let dim = c.usize()?;
    let n_weights = nrows
        .checked_mul(ncols)
        .and_then(|nn| nn.checked_mul(dim))
        .ok_or_else(|| SomError::format("SOM1", "codebook size overflows"))?;
    if n_weights > bytes.len() / 8 {
        return Err(SomError::format("SOM1", "truncated codebook"));
    }
    let weights = (0..n_weights).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let codebook = Codebook::new(nrows, ncols, dim, weights)?;
    let count = c.usize()?;
    if count > bytes.len() / 16 {
        return Err(SomError::format("SOM1", "truncated assignments"));
    }
    let assignments = (0..count)
        .map(|_| {
            let idx = c.usize()?;
            let d = c.f64()?;
            if idx >= codebook.n_units() {
                return Err(SomError::format("SOM1", "assignment refers to a missing unit"));
            }
            Ok(BmuResult::new(&codebook, idx, d))
        })
        .collect::<Result<Vec<_>>>()?;
    let quantization_error = c.f64()?;
    if c.pos != bytes.len() {
        return Err(SomError::format("SOM1", "trailing bytes"));
    }
    Ok(TrainedMap {
        codebook,
        geometry,
        schedule,
        assignments,
        quantization_error,
        engine: Engine::Serial,
        wall_seconds: 0.0,
    })
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(SomError::format("SOM1", "unexpected end of file"));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| SomError::format("SOM1", "count overflows usize"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DocTermMatrix, Weighting};
    use crate::som::train::train_serial;

    fn small_map() -> TrainedMap {
        let d = DocTermMatrix::from_dense(
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7], vec![0.2, 0.9]],
            Weighting::Tf,
        )
        .unwrap();
        let g = MapGeometry::from_eigenvalues(4, 1.0, 1.0).unwrap().with_override(2, 3, 50).unwrap();
        let s = TrainingSchedule::for_geometry(&g, 3);
        train_serial(&d, &g, &s).unwrap()
    }

    #[test]
    fn round_trip_preserves_payload() {
        let map = small_map();
        let bytes = encode(&map);
        assert_eq!(&bytes[..4], b"SOM1");
        let back = decode(&bytes).unwrap();
        assert_eq!(back.codebook, map.codebook);
        assert_eq!(back.geometry, map.geometry);
        assert_eq!(back.schedule, map.schedule);
        assert_eq!(back.assignments, map.assignments);
        assert_eq!(back.quantization_error.to_bits(), map.quantization_error.to_bits());
        assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn layout_offsets() {
        let map = small_map();
        let bytes = encode(&map);
        let header = 4 + 4 + 11 * 8 + 5 * 8;
        let dim = u64::from_le_bytes(bytes[header..header + 8].try_into().unwrap());
        assert_eq!(dim, 2);
        let w0 = f64::from_le_bytes(bytes[header + 8..header + 16].try_into().unwrap());
        assert_eq!(w0, map.codebook.weights()[0]);
        assert_eq!(bytes.len(), header + 8 + 6 * 2 * 8 + 8 + 4 * 16 + 8);
    }

    #[test]
    fn rejects_damage() {
        let bytes = encode(&small_map());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut long = bytes;
        long.push(1);
        assert!(decode(&long).is_err());
    }
}
