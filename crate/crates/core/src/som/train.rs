//! Serial reference trainer.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codebook::{assign, bmu_serial, linear_init, mean_nonzero_distance, BmuResult, Codebook};
use super::geometry::MapGeometry;
use super::schedule::{Decayed, TrainingSchedule};
use crate::corpus::DocTermMatrix;
use crate::error::{Result, SomError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Serial,
    ParallelStrict,
    ParallelFast,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Serial => "serial",
            Engine::ParallelStrict => "parallel-strict",
            Engine::ParallelFast => "parallel-fast",
        })
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "serial" => Ok(Engine::Serial),
            "parallel-strict" => Ok(Engine::ParallelStrict),
            "parallel-fast" => Ok(Engine::ParallelFast),
            other => Err(format!(
                "unknown engine {other:?} (expected serial, parallel-strict or parallel-fast)"
            )),
        }
    }
}

/// Result of a training run.
///
/// Everything except `engine` and `wall_seconds` is a pure function of the
/// data, geometry and schedule; those two live outside the `SOM1` payload.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedMap {
    pub codebook: Codebook,
    pub geometry: MapGeometry,
    pub schedule: TrainingSchedule,
    pub assignments: Vec<BmuResult>,
    pub quantization_error: f64,
    pub engine: Engine,
    pub wall_seconds: f64,
}

impl TrainedMap {
    pub(crate) fn finish(
        data: &DocTermMatrix,
        codebook: Codebook,
        geometry: &MapGeometry,
        schedule: &TrainingSchedule,
        engine: Engine,
        wall_seconds: f64,
    ) -> Result<Self> {
        let assignments = assign(data, &codebook)?;
        let quantization_error = mean_nonzero_distance(data, &assignments)?;
        Ok(Self {
            codebook,
            geometry: geometry.clone(),
            schedule: schedule.clone(),
            assignments,
            quantization_error,
            engine,
            wall_seconds,
        })
    }
}

/// Uniform draws, with replacement, over the nonzero rows of a matrix.
/// Both engines consume the same stream for the same seed.
pub struct SampleStream {
    rng: ChaCha8Rng,
    rows: Vec<usize>,
}

impl SampleStream {
    pub fn new(data: &DocTermMatrix, seed: u64) -> Result<Self> {
        let rows = data.nonzero_rows();
        if rows.is_empty() {
            return Err(SomError::EmptyData);
        }
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            rows,
        })
    }

    pub fn next_row(&mut self) -> usize {
        self.rows[self.rng.gen_range(0..self.rows.len())]
    }
}

/// `w ← w + h·(x − w)`. A zero activation leaves `w` untouched.
#[inline]
pub fn update_unit(w: &mut [f64], x: &[f64], h: f64) {
    if h == 0.0 {
        return;
    }
    for (wi, &xi) in w.iter_mut().zip(x) {
        *wi += h * (xi - *wi);
    }
}

/// Applies one update with a caller-chosen activation per unit.
pub fn update_with_activation(cb: &mut Codebook, x: &[f64], h: impl Fn(usize) -> f64) -> Result<()> {
    cb.check_dim(x.len())?;
    for u in 0..cb.n_units() {
        let hu = h(u);
        update_unit(cb.unit_mut(u), x, hu);
    }
    Ok(())
}

/// Moves every unit toward `x` by its Gaussian activation around `winner`.
pub fn update_step(
    cb: &mut Codebook,
    x: &[f64],
    winner: &BmuResult,
    t: u64,
    s: &TrainingSchedule,
) -> Result<()> {
    let decayed = s.at(t);
    let dist: Vec<f64> = (0..cb.n_units())
        .map(|u| cb.lattice_distance(u, winner.index))
        .collect();
    update_with_activation(cb, x, |u| decayed.kernel(dist[u]))
}

/// Activation of `unit` for a winner; shared by both engines so per-unit
/// arithmetic is identical.
#[inline]
pub(crate) fn activation(cb_positions: &[(f64, f64)], unit: usize, winner: usize, decayed: &Decayed) -> f64 {
    let (ax, ay) = cb_positions[unit];
    let (bx, by) = cb_positions[winner];
    decayed.kernel(((ax - bx).powi(2) + (ay - by).powi(2)).sqrt())
}

/// Trains from the principal-plane initialization.
pub fn train_serial(data: &DocTermMatrix, g: &MapGeometry, s: &TrainingSchedule) -> Result<TrainedMap> {
    let init = linear_init(data, g)?;
    train_serial_from(data, init, g, s)
}

/// Trains a given initial codebook, one random sample per iteration.
pub fn train_serial_from(
    data: &DocTermMatrix,
    mut cb: Codebook,
    g: &MapGeometry,
    s: &TrainingSchedule,
) -> Result<TrainedMap> {
    s.validate()?;
    cb.check_dim(data.n_cols())?;
    let mut samples = SampleStream::new(data, s.seed)?;
    let mut x = vec![0.0; data.n_cols()];

    let start = Instant::now();
    for t in 0..s.iterations {
        let row = samples.next_row();
        data.densify_row_into(row, &mut x);
        let winner = bmu_serial(&x, &cb)?;
        let decayed = s.at(t);
        for u in 0..cb.n_units() {
            let h = activation(cb.positions(), u, winner.index, &decayed);
            update_unit(cb.unit_mut(u), &x, h);
        }
    }
    let wall = start.elapsed().as_secs_f64();

    TrainedMap::finish(data, cb, g, s, Engine::Serial, wall)
}
