//! Leading principal components of a row set without forming the covariance.
//!
//! The sample covariance `C = Σ (xᵢ − μ)(xᵢ − μ)ᵀ / (m − 1)` is only ever
//! applied to vectors, row by row, so sparse document-term matrices with
//! thousands of columns stay cheap. A small block of vectors is iterated
//! through `C` and re-orthonormalized; a Rayleigh–Ritz step on the block
//! yields the eigenpairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::DocTermMatrix;
use crate::error::{Result, SomError};

const START_SEED: u64 = 0x5eed_0f_9ca;
const MAX_SWEEPS: usize = 3000;
const RESIDUAL_TOL: f64 = 1e-11;
const EXTRA_VECTORS: usize = 8;

/// Row access needed by the covariance operator.
pub trait RowSet {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn dot_row(&self, r: usize, v: &[f64]) -> f64;
    /// `y += a · row(r)`
    fn axpy_row(&self, r: usize, a: f64, y: &mut [f64]);
}

/// The nonzero rows of a document-term matrix.
pub struct SparseRows<'a> {
    matrix: &'a DocTermMatrix,
    rows: Vec<usize>,
}

impl<'a> SparseRows<'a> {
    pub fn nonzero(matrix: &'a DocTermMatrix) -> Self {
        Self {
            rows: matrix.nonzero_rows(),
            matrix,
        }
    }
}

impl RowSet for SparseRows<'_> {
    fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn n_cols(&self) -> usize {
        self.matrix.n_cols()
    }

    fn dot_row(&self, r: usize, v: &[f64]) -> f64 {
        let (idx, val) = self.matrix.row(self.rows[r]);
        idx.iter().zip(val).map(|(&c, &x)| x * v[c as usize]).sum()
    }

    fn axpy_row(&self, r: usize, a: f64, y: &mut [f64]) {
        let (idx, val) = self.matrix.row(self.rows[r]);
        for (&c, &x) in idx.iter().zip(val) {
            y[c as usize] += a * x;
        }
    }
}

/// Row-major dense rows, e.g. a codebook's weight matrix.
pub struct DenseRows<'a> {
    pub data: &'a [f64],
    pub dim: usize,
}

impl RowSet for DenseRows<'_> {
    fn n_rows(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    fn n_cols(&self) -> usize {
        self.dim
    }

    fn dot_row(&self, r: usize, v: &[f64]) -> f64 {
        dot(&self.data[r * self.dim..(r + 1) * self.dim], v)
    }

    fn axpy_row(&self, r: usize, a: f64, y: &mut [f64]) {
        for (yi, &x) in y.iter_mut().zip(&self.data[r * self.dim..(r + 1) * self.dim]) {
            *yi += a * x;
        }
    }
}

#[derive(Debug, Clone)]
pub struct PrincipalComponents {
    pub mean: Vec<f64>,
    /// Descending, nonnegative.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors, one per eigenvalue. When the data has fewer columns
    /// than requested components, the surplus entries are zero vectors.
    pub vectors: Vec<Vec<f64>>,
}

/// The two leading principal directions of a document-term matrix.
#[derive(Debug, Clone)]
pub struct PrincipalPlane {
    pub pc1: f64,
    pub pc2: f64,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub mean: Vec<f64>,
}

/// Top two eigenpairs of the covariance of the matrix's nonzero rows.
pub fn top2_principal(data: &DocTermMatrix) -> Result<PrincipalPlane> {
    let pcs = principal_components(&SparseRows::nonzero(data), 2)?;
    let mut vals = pcs.eigenvalues.into_iter();
    let mut vecs = pcs.vectors.into_iter();
    Ok(PrincipalPlane {
        pc1: vals.next().unwrap(),
        pc2: vals.next().unwrap(),
        v1: vecs.next().unwrap(),
        v2: vecs.next().unwrap(),
        mean: pcs.mean,
    })
}

/// Leading `k` eigenpairs of the sample covariance of `rows`.
pub fn principal_components<R: RowSet>(rows: &R, k: usize) -> Result<PrincipalComponents> {
    let m = rows.n_rows();
    let n = rows.n_cols();
    if m < 2 {
        return Err(SomError::DegenerateData(format!(
            "principal components need at least 2 rows, got {m}"
        )));
    }
    let mut mean = vec![0.0; n];
    for r in 0..m {
        rows.axpy_row(r, 1.0, &mut mean);
    }
    mean.iter_mut().for_each(|v| *v /= m as f64);

    let op = Covariance { rows, mean: &mean };
    // Eigenvalues below this are rounding noise from centering.
    let floor = 1e-13 * op.second_moment();

    let p = n.min(k + EXTRA_VECTORS);
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(p);
    while basis.len() < p {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        push_orthonormal(&mut basis, v, &mut rng);
    }

    let mut ritz_vals = vec![0.0; p];
    let mut ritz_vecs = basis.clone();
    for _ in 0..MAX_SWEEPS {
        let images: Vec<Vec<f64>> = basis.iter().map(|v| op.apply(v)).collect();
        let mut h = vec![vec![0.0; p]; p];
        for i in 0..p {
            for j in i..p {
                let hij = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                h[i][j] = hij;
                h[j][i] = hij;
            }
        }
        let (vals, rot) = symmetric_eigen(h);
        ritz_vals = vals;
        ritz_vecs = combine(&basis, &rot);
        let ritz_images = combine(&images, &rot);

        let scale = ritz_vals[0].abs().max(floor).max(f64::MIN_POSITIVE);
        let converged = (0..k.min(p)).all(|j| {
            let res: f64 = ritz_images[j]
                .iter()
                .zip(&ritz_vecs[j])
                .map(|(a, b)| (a - ritz_vals[j] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            res <= RESIDUAL_TOL * scale
        });
        if converged || p == n {
            break;
        }
        basis.clear();
        for w in ritz_images {
            push_orthonormal(&mut basis, w, &mut rng);
        }
    }

    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for j in 0..k {
        if j < p {
            let v = ritz_vals[j];
            eigenvalues.push(if v <= floor { 0.0 } else { v });
            vectors.push(ritz_vecs[j].clone());
        } else {
            eigenvalues.push(0.0);
            vectors.push(vec![0.0; n]);
        }
    }
    Ok(PrincipalComponents {
        mean,
        eigenvalues,
        vectors,
    })
}

struct Covariance<'a, R> {
    rows: &'a R,
    mean: &'a [f64],
}

impl<R: RowSet> Covariance<'_, R> {
    /// `C·v`, centering each row on the fly.
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let m = self.rows.n_rows();
        let mean_dot = dot(self.mean, v);
        let mut out = vec![0.0; v.len()];
        let mut coeff_sum = 0.0;
        for r in 0..m {
            let s = self.rows.dot_row(r, v) - mean_dot;
            self.rows.axpy_row(r, s, &mut out);
            coeff_sum += s;
        }
        let denom = (m - 1) as f64;
        for (o, &mu) in out.iter_mut().zip(self.mean) {
            *o = (*o - mu * coeff_sum) / denom;
        }
        out
    }

    /// Uncentered second moment `Σ‖xᵢ‖² / (m − 1)`, the scale of the problem.
    fn second_moment(&self) -> f64 {
        let n = self.rows.n_cols();
        let mut e = vec![0.0; n];
        let mut total = 0.0;
        // per-row norm through the row interface
        for r in 0..self.rows.n_rows() {
            e.iter_mut().for_each(|v| *v = 0.0);
            self.rows.axpy_row(r, 1.0, &mut e);
            total += dot(&e, &e);
        }
        total / (self.rows.n_rows() - 1) as f64
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram–Schmidt (twice) against `basis`; a vector that collapses is replaced
/// by a fresh random one so the block keeps full rank.
fn push_orthonormal(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>, rng: &mut ChaCha8Rng) {
    let n = v.len();
    loop {
        let before = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for b in basis.iter() {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let after = dot(&v, &v).sqrt();
        if after > 1e-10 * before && after > 0.0 {
            v.iter_mut().for_each(|x| *x /= after);
            basis.push(v);
            return;
        }
        v = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    }
}

/// Column `j` of the result is `Σᵢ vecs[i] · rot[i][j]`.
fn combine(vecs: &[Vec<f64>], rot: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = rot.len();
    let n = vecs[0].len();
    (0..p)
        .map(|j| {
            let mut out = vec![0.0; n];
            for i in 0..p {
                let c = rot[i][j];
                out.iter_mut().zip(&vecs[i]).for_each(|(o, v)| *o += c * v);
            }
            out
        })
        .collect()
}

/// Cyclic Jacobi eigen-decomposition of a small symmetric matrix. Returns
/// eigenvalues in descending order and the matching eigenvectors as columns.
pub(crate) fn symmetric_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let p = a.len();
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|i| (0..p).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..100 {
        let off: f64 = (0..p)
            .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..p).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for i in 0..p {
            for j in i + 1..p {
                if a[i][j] == 0.0 {
                    continue;
                }
                let theta = (a[j][j] - a[i][i]) / (2.0 * a[i][j]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..p {
                    let (aki, akj) = (a[k][i], a[k][j]);
                    a[k][i] = c * aki - s * akj;
                    a[k][j] = s * aki + c * akj;
                }
                for k in 0..p {
                    let (aik, ajk) = (a[i][k], a[j][k]);
                    a[i][k] = c * aik - s * ajk;
                    a[j][k] = s * aik + c * ajk;
                }
                for row in v.iter_mut() {
                    let (vi, vj) = (row[i], row[j]);
                    row[i] = c * vi - s * vj;
                    row[j] = s * vi + c * vj;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| a[y][y].total_cmp(&a[x][x]).then(x.cmp(&y)));
    let vals = order.iter().map(|&i| a[i][i]).collect();
    let vecs = (0..p)
        .map(|r| order.iter().map(|&c| v[r][c]).collect())
        .collect();
    (vals, vecs)
}
