//! Synthetic corpora and the engine comparison / map-size scaling harness.
//!
//! Engines always run one after another. Reported wall time covers only the
//! training loop; data generation, initialization and final assignment are
//! outside it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{idf, l2_normalize, DocTermMatrix, Weighting};
use crate::error::{Result, SomError};
use crate::parallel::{train_parallel_from, Mode};
use crate::som::{linear_init, train_serial_from, Engine, MapGeometry, TrainedMap, TrainingSchedule};

/// Fraction of each document's tokens drawn from its cluster's topic block.
const TOPIC_SHARE: f64 = 0.8;

/// Column header of [`BenchReport::to_csv`].
pub const CSV_HEADER: &str = "engine,dataset,m,n,nrows,ncols,num_iter,qe,wall_seconds,speedup,ratio_of_increase";

/// Clustered bag-of-words corpus.
///
/// The vocabulary is split into `k` disjoint contiguous topic blocks. Every
/// document draws `max(1, ceil(dims·(1 − sparsity)))` tokens, most of them
/// from its own block and the rest uniformly. Counts are TF-IDF weighted and
/// L2-normalized. Rows are grouped by cluster; the second value holds each
/// row's cluster.
pub fn synth_corpus(
    k: usize,
    docs_per_cluster: usize,
    dims: usize,
    sparsity: f64,
    seed: u64,
) -> Result<(DocTermMatrix, Vec<usize>)> {
    if k == 0 || dims < k {
        return Err(SomError::InvalidShape(format!(
            "need 1 <= clusters <= dims, got {k} clusters over {dims} dims"
        )));
    }
    if !(0.0..1.0).contains(&sparsity) {
        return Err(SomError::InvalidShape(format!("sparsity {sparsity} outside [0, 1)")));
    }
    let tokens = ((dims as f64 * (1.0 - sparsity)).ceil() as usize).max(1);
    let block = dims / k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = k * docs_per_cluster;

    let mut counts: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    let mut bag = vec![0u32; dims];
    for cluster in 0..k {
        let lo = cluster * block;
        // the last block absorbs the remainder
        let hi = if cluster + 1 == k { dims } else { lo + block };
        for _ in 0..docs_per_cluster {
            bag.iter_mut().for_each(|c| *c = 0);
            for _ in 0..tokens {
                let term = if rng.gen_bool(TOPIC_SHARE) {
                    rng.gen_range(lo..hi)
                } else {
                    rng.gen_range(0..dims)
                };
                bag[term] += 1;
            }
            counts.push(
                bag.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(t, &c)| (t, c as f64))
                    .collect(),
            );
            labels.push(cluster);
        }
    }

    let mut df = vec![0usize; dims];
    for row in &counts {
        for &(t, _) in row {
            df[t] += 1;
        }
    }
    let weights: Vec<f64> = df.iter().map(|&d| if d == 0 { 0.0 } else { idf(d, m).unwrap() }).collect();
    let weighted = counts
        .into_iter()
        .map(|row| row.into_iter().map(|(t, c)| (t, c * weights[t])).collect())
        .collect();
    let tfidf = DocTermMatrix::from_rows(dims, weighted, Weighting::Tfidf)?;
    Ok((l2_normalize(&tfidf).0, labels))
}

/// Dense matrix of uniform `(0, 1]` entries, rows L2-normalized.
pub fn dense_random(m: usize, n: usize, seed: u64) -> Result<DocTermMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect())
        .collect();
    Ok(l2_normalize(&DocTermMatrix::from_dense(&rows, Weighting::Tf)?).0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub engine: Engine,
    pub dataset: String,
    pub m: usize,
    pub n: usize,
    pub nrows: usize,
    pub ncols: usize,
    pub num_iter: u64,
    pub qe: f64,
    pub wall_seconds: f64,
    /// Serial time over this row's time, for the same dataset and map.
    pub speedup: Option<f64>,
    /// This row's time over the same engine's time at the previous map size.
    pub ratio_of_increase: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory csv write");
        }
        let body = String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8");
        format!("{CSV_HEADER}\n{body}")
    }

    pub fn rows_for(&self, engine: Engine) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(move |r| r.engine == engine)
    }

    /// Consecutive-size time ratios of one engine, in map-size order.
    pub fn ratios(&self, engine: Engine) -> Vec<f64> {
        self.rows_for(engine).filter_map(|r| r.ratio_of_increase).collect()
    }

    /// Checks that strict rows reproduce the serial QE exactly and fast rows
    /// stay within `1e-3` relative.
    pub fn check_parity(&self) -> Result<()> {
        for r in &self.rows {
            let Some(base) = self
                .rows
                .iter()
                .find(|s| s.engine == Engine::Serial && s.dataset == r.dataset && (s.nrows, s.ncols) == (r.nrows, r.ncols))
            else {
                continue;
            };
            let ok = match r.engine {
                Engine::Serial => true,
                Engine::ParallelStrict => r.qe == base.qe,
                Engine::ParallelFast => (r.qe - base.qe).abs() <= 1e-3 * base.qe.abs(),
            };
            if !ok {
                return Err(SomError::ParityViolation(format!(
                    "{} QE {} departs from serial QE {} on {}",
                    r.engine, r.qe, base.qe, r.dataset
                )));
            }
        }
        Ok(())
    }
}

fn run_engine(
    engine: Engine,
    data: &DocTermMatrix,
    init: &crate::som::Codebook,
    g: &MapGeometry,
    s: &TrainingSchedule,
    workers: usize,
) -> Result<TrainedMap> {
    match engine {
        Engine::Serial => train_serial_from(data, init.clone(), g, s),
        Engine::ParallelStrict => train_parallel_from(data, init.clone(), g, s, workers, Mode::Strict),
        Engine::ParallelFast => train_parallel_from(data, init.clone(), g, s, workers, Mode::Fast),
    }
}

fn row(engine: Engine, dataset: &str, data: &DocTermMatrix, g: &MapGeometry, s: &TrainingSchedule, map: &TrainedMap, wall: f64) -> BenchRow {
    BenchRow {
        engine,
        dataset: dataset.to_string(),
        m: data.n_rows(),
        n: data.n_cols(),
        nrows: g.nrows,
        ncols: g.ncols,
        num_iter: s.iterations,
        qe: map.quantization_error,
        wall_seconds: wall,
        speedup: None,
        ratio_of_increase: None,
    }
}

/// Serial, parallel-strict and parallel-fast runs from one shared
/// initialization and seed.
pub fn compare_engines(
    data: &DocTermMatrix,
    dataset: &str,
    g: &MapGeometry,
    s: &TrainingSchedule,
    workers: usize,
) -> Result<BenchReport> {
    let init = linear_init(data, g)?;
    let mut rows = Vec::with_capacity(3);
    for engine in [Engine::Serial, Engine::ParallelStrict, Engine::ParallelFast] {
        let map = run_engine(engine, data, &init, g, s, workers)?;
        rows.push(row(engine, dataset, data, g, s, &map, map.wall_seconds));
    }
    let serial = rows[0].wall_seconds;
    for r in &mut rows {
        r.speedup = Some(serial / r.wall_seconds);
    }
    Ok(BenchReport { rows })
}

#[derive(Debug, Clone)]
pub struct ScalingConfig {
    /// Square map sides, strictly ascending.
    pub sides: Vec<usize>,
    pub dim: usize,
    pub m: usize,
    pub iterations: u64,
    pub workers: usize,
    pub seed: u64,
    /// Each timing is the fastest of this many runs.
    pub repeats: usize,
    pub engines: Vec<Engine>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            sides: vec![16, 32, 64, 128],
            dim: 64,
            m: 1000,
            iterations: 10_000,
            workers: crate::parallel::default_workers(),
            seed: 0,
            repeats: 3,
            engines: vec![Engine::Serial, Engine::ParallelFast],
        }
    }
}

/// Trains every engine at every square map size on the same data and
/// iteration count.
pub fn scaling_study(cfg: &ScalingConfig) -> Result<BenchReport> {
    if cfg.sides.is_empty() || cfg.sides.contains(&0) || cfg.sides.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SomError::InvalidShape(format!(
            "map sides must be positive and strictly ascending, got {:?}",
            cfg.sides
        )));
    }
    let data = dense_random(cfg.m, cfg.dim, cfg.seed)?;
    let dataset = format!("dense-{}x{}", cfg.m, cfg.dim);
    let base = MapGeometry::from_eigenvalues(data.n_rows(), 1.0, 1.0)?;
    let mut rows: Vec<BenchRow> = Vec::new();
    for &side in &cfg.sides {
        let g = base.clone().with_override(side, side, cfg.iterations)?;
        let s = TrainingSchedule::for_geometry(&g, cfg.seed);
        let init = linear_init(&data, &g)?;
        for &engine in &cfg.engines {
            let mut best: Option<(TrainedMap, f64)> = None;
            for _ in 0..cfg.repeats.max(1) {
                let map = run_engine(engine, &data, &init, &g, &s, cfg.workers)?;
                let wall = map.wall_seconds;
                if best.as_ref().is_none_or(|(_, b)| wall < *b) {
                    best = Some((map, wall));
                }
            }
            let (map, wall) = best.unwrap();
            rows.push(row(engine, &dataset, &data, &g, &s, &map, wall));
        }
    }
    for i in 0..rows.len() {
        let serial = rows
            .iter()
            .find(|r| r.engine == Engine::Serial && r.nrows == rows[i].nrows)
            .map(|r| r.wall_seconds);
        rows[i].speedup = serial.map(|t| t / rows[i].wall_seconds);
        let previous = rows[..i].iter().rev().find(|r| r.engine == rows[i].engine).map(|r| r.wall_seconds);
        rows[i].ratio_of_increase = previous.map(|t| rows[i].wall_seconds / t);
    }
    Ok(BenchReport { rows })
}
