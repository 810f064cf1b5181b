//! Map sizing heuristic and the hexagonal lattice.

use serde::{Deserialize, Serialize};

use super::pca::top2_principal;
use crate::corpus::DocTermMatrix;
use crate::error::{Result, SomError};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Lattice shape and iteration budget, together with every intermediate of the
/// sizing heuristic that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapGeometry {
    /// Number of (trainable) input documents.
    pub m: usize,
    /// Target unit count, `round(5·√m)`.
    pub munits: usize,
    pub pc1: f64,
    pub pc2: f64,
    /// Aspect ratio of the two leading principal axes.
    pub r: f64,
    pub size1: usize,
    pub size2: usize,
    pub nrows: usize,
    pub ncols: usize,
    /// Map units per datum, `nn / m`.
    pub mpd: f64,
    pub num_iterations: u64,
}

impl MapGeometry {
    /// Runs the sizing heuristic on precomputed leading eigenvalues.
    pub fn from_eigenvalues(m: usize, pc1: f64, pc2: f64) -> Result<Self> {
        if m < 2 {
            return Err(SomError::DegenerateData(format!("need at least 2 documents, got {m}")));
        }
        let munits = (5.0 * (m as f64).sqrt()).round() as usize;
        let r = if pc1 == 0.0 || pc2 * (munits as f64) < pc1 {
            1.0
        } else {
            (pc1 / pc2).sqrt()
        };
        let raw = (munits as f64).min((munits as f64 / (r * 0.75f64.sqrt())).sqrt());
        let size1 = (raw.round() as usize).max(1);
        let size2 = (munits / size1).max(1);
        let nrows = size1.min(size2);
        let ncols = size1.max(size2);
        let mut g = Self {
            m,
            munits,
            pc1,
            pc2,
            r,
            size1,
            size2,
            nrows,
            ncols,
            mpd: 0.0,
            num_iterations: 0,
        };
        g.refresh_derived();
        Ok(g)
    }

    /// Replaces the lattice shape and iteration count with explicit values,
    /// keeping the heuristic's intermediates for the record.
    pub fn with_override(mut self, nrows: usize, ncols: usize, num_iterations: u64) -> Result<Self> {
        if nrows == 0 || ncols == 0 {
            return Err(SomError::InvalidShape(format!("map {nrows}x{ncols} has no units")));
        }
        self.nrows = nrows;
        self.ncols = ncols;
        self.refresh_derived();
        self.num_iterations = num_iterations;
        Ok(self)
    }

    fn refresh_derived(&mut self) {
        let nn = self.nn();
        self.mpd = nn as f64 / self.m as f64;
        // ceil(50·nn/m) in exact integer arithmetic
        let epochs = (50 * nn as u64).div_ceil(self.m as u64);
        self.num_iterations = epochs * self.m as u64 * 4;
    }

    pub fn nn(&self) -> usize {
        self.nrows * self.ncols
    }
}

/// Computes the map geometry for `m` documents from the two leading
/// eigenvalues of the data covariance.
pub fn map_geometry(m: usize, data: &DocTermMatrix) -> Result<MapGeometry> {
    let plane = top2_principal(data)?;
    MapGeometry::from_eigenvalues(m, plane.pc1, plane.pc2)
}

/// Planar position of unit `(row, col)`: pointy-top hexagons, odd rows shifted
/// right by half a cell, unit spacing between neighbors.
pub fn hex_position(row: usize, col: usize) -> (f64, f64) {
    let x = col as f64 + 0.5 * (row % 2) as f64;
    let y = row as f64 * SQRT3_2;
    (x, y)
}

/// Euclidean distance between two lattice units in the plane.
pub fn grid_distance(u: (usize, usize), v: (usize, usize)) -> f64 {
    let (ax, ay) = hex_position(u.0, u.1);
    let (bx, by) = hex_position(v.0, v.1);
    ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt()
}
