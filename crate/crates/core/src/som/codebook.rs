use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::geometry::{hex_position, MapGeometry};
use super::pca::{top2_principal, PrincipalPlane};
use crate::corpus::DocTermMatrix;
use crate::error::{Result, SomError};

/// Prototype vectors on a hexagonal lattice. Unit `(i, j)` lives at flat
/// index `i·ncols + j`; its weights occupy `weights[idx·dim .. (idx+1)·dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    nrows: usize,
    ncols: usize,
    dim: usize,
    weights: Vec<f64>,
    positions: Vec<(f64, f64)>,
}

impl Codebook {
    pub fn new(nrows: usize, ncols: usize, dim: usize, weights: Vec<f64>) -> Result<Self> {
        if nrows == 0 || ncols == 0 {
            return Err(SomError::InvalidShape(format!("map {nrows}x{ncols} has no units")));
        }
        if weights.len() != nrows * ncols * dim {
            return Err(SomError::DimensionMismatch {
                expected: nrows * ncols * dim,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(SomError::InvalidShape("codebook weights must be finite".into()));
        }
        let positions = (0..nrows)
            .flat_map(|i| (0..ncols).map(move |j| hex_position(i, j)))
            .collect();
        Ok(Self {
            nrows,
            ncols,
            dim,
            weights,
            positions,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn n_units(&self) -> usize {
        self.nrows * self.ncols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn unit(&self, idx: usize) -> &[f64] {
        &self.weights[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn unit_mut(&mut self, idx: usize) -> &mut [f64] {
        &mut self.weights[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.ncols, idx % self.ncols)
    }

    pub fn flat_index(&self, row: usize, col: usize) -> usize {
        row * self.ncols + col
    }

    /// Planar hexagonal position of each unit, by flat index.
    pub fn positions(&self) -> &[(f64, f64)] {
        &self.positions
    }

    /// Lattice distance between two units, by flat index.
    #[inline]
    pub fn lattice_distance(&self, a: usize, b: usize) -> f64 {
        let (ax, ay) = self.positions[a];
        let (bx, by) = self.positions[b];
        ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(SomError::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }
}

/// Winner for one input: the nearest unit and its Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BmuResult {
    pub index: usize,
    pub row: usize,
    pub col: usize,
    pub distance: f64,
}

impl BmuResult {
    pub fn new(cb: &Codebook, index: usize, distance: f64) -> Self {
        let (row, col) = cb.coords(index);
        Self {
            index,
            row,
            col,
            distance,
        }
    }
}

/// How per-unit squared distances are accumulated over dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accumulation {
    /// One running sum, dimensions in order. Reproducible bit for bit.
    Sequential,
    /// Eight interleaved partial sums combined at the end.
    Reassociated,
}

#[inline]
pub fn sq_distance_sequential(x: &[f64], w: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(w) {
        let d = a - b;
        s += d * d;
    }
    s
}

#[inline]
pub fn sq_distance_reassociated(x: &[f64], w: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let xc = x.chunks_exact(8);
    let wc = w.chunks_exact(8);
    let (xr, wr) = (xc.remainder(), wc.remainder());
    for (a, b) in xc.zip(wc) {
        for k in 0..8 {
            let d = a[k] - b[k];
            acc[k] += d * d;
        }
    }
    let mut tail = 0.0;
    for (a, b) in xr.iter().zip(wr) {
        let d = a - b;
        tail += d * d;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Nearest unit among `units`, comparing Euclidean distances; equal distances
/// go to the lower index. `None` for an empty range.
pub(crate) fn scan_units(
    x: &[f64],
    weights: &[f64],
    dim: usize,
    units: Range<usize>,
    first_unit: usize,
    acc: Accumulation,
) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for u in units {
        let local = u - first_unit;
        let w = &weights[local * dim..(local + 1) * dim];
        let sq = match acc {
            Accumulation::Sequential => sq_distance_sequential(x, w),
            Accumulation::Reassociated => sq_distance_reassociated(x, w),
        };
        let d = sq.sqrt();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, u));
        }
    }
    best
}

/// Exhaustive nearest-unit search.
pub fn bmu_serial(x: &[f64], cb: &Codebook) -> Result<BmuResult> {
    cb.check_dim(x.len())?;
    let (d, idx) = scan_units(x, &cb.weights, cb.dim, 0..cb.n_units(), 0, Accumulation::Sequential)
        .expect("codebook has at least one unit");
    Ok(BmuResult::new(cb, idx, d))
}

/// Places the prototypes on a regular grid spanning the plane of the two
/// leading principal components: columns sweep `[-1, 1]·√pc1` along `v1`,
/// rows sweep `[-1, 1]·√pc2` along `v2`, centered on the data mean.
pub fn linear_init(data: &DocTermMatrix, g: &MapGeometry) -> Result<Codebook> {
    let plane = top2_principal(data)?;
    linear_init_from(&plane, g.nrows, g.ncols)
}

pub fn linear_init_from(plane: &PrincipalPlane, nrows: usize, ncols: usize) -> Result<Codebook> {
    let dim = plane.mean.len();
    let sweep = |k: usize, n: usize| {
        if n > 1 {
            -1.0 + 2.0 * k as f64 / (n - 1) as f64
        } else {
            0.0
        }
    };
    let (s1, s2) = (plane.pc1.sqrt(), plane.pc2.sqrt());
    let mut weights = Vec::with_capacity(nrows * ncols * dim);
    for i in 0..nrows {
        let b = sweep(i, nrows) * s2;
        for j in 0..ncols {
            let a = sweep(j, ncols) * s1;
            weights.extend(
                (0..dim).map(|d| plane.mean[d] + a * plane.v1[d] + b * plane.v2[d]),
            );
        }
    }
    Codebook::new(nrows, ncols, dim, weights)
}

/// BMU for every row, in row order. All-zero rows are assigned too.
pub fn assign(data: &DocTermMatrix, cb: &Codebook) -> Result<Vec<BmuResult>> {
    cb.check_dim(data.n_cols())?;
    let mut x = vec![0.0; cb.dim];
    (0..data.n_rows())
        .map(|r| {
            data.densify_row_into(r, &mut x);
            bmu_serial(&x, cb)
        })
        .collect()
}

/// Mean BMU distance over the nonzero rows.
pub fn quantization_error(data: &DocTermMatrix, cb: &Codebook) -> Result<f64> {
    let assignments = assign(data, cb)?;
    mean_nonzero_distance(data, &assignments)
}

pub(crate) fn mean_nonzero_distance(data: &DocTermMatrix, assignments: &[BmuResult]) -> Result<f64> {
    let (sum, count) = assignments
        .iter()
        .enumerate()
        .filter(|(r, _)| !data.row_is_zero(*r))
        .fold((0.0, 0usize), |(s, c), (_, a)| (s + a.distance, c + 1));
    if count == 0 {
        return Err(SomError::EmptyData);
    }
    Ok(sum / count as f64)
}
