//! Data-parallel trainer.
//!
//! Each iteration runs in three phases over a fixed worker pool:
//!
//! 1. every worker scans its own contiguous range of units and posts the
//!    nearest one as a [`Candidate`];
//! 2. after a barrier, the posted candidates are reduced with a padded
//!    pairwise tournament ([`reduce_min`]);
//! 3. every worker applies the neighborhood update to its own units.
//!
//! Workers own disjoint `&mut` slices of the weight matrix for the whole run,
//! so no unit can be written by two workers. Phase 1 of the next iteration
//! only reads a worker's own units, so it needs no barrier after phase 3.
//! Candidate slots are double-buffered by iteration parity, which is what lets
//! one barrier per iteration suffice.

use std::hint;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::thread;
use std::time::Instant;

use crate::corpus::DocTermMatrix;
use crate::error::{Result, SomError};
use crate::som::{
    activation, linear_init, scan_units, update_unit, Accumulation, BmuResult, Codebook, Engine,
    MapGeometry, SampleStream, TrainedMap, TrainingSchedule,
};

/// Contiguous unit range `[start, end)` owned by one worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitPartition {
    pub worker: usize,
    pub start: usize,
    pub end: usize,
}

impl UnitPartition {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// Splits `nn` units into `workers` contiguous ranges whose sizes differ by at
/// most one; earlier workers take the remainder.
pub fn partition_units(nn: usize, workers: usize) -> Result<Vec<UnitPartition>> {
    if workers == 0 {
        return Err(SomError::InvalidWorkerCount);
    }
    let base = nn / workers;
    let extra = nn % workers;
    let mut start = 0;
    Ok((0..workers)
        .map(|worker| {
            let len = base + usize::from(worker < extra);
            let p = UnitPartition {
                worker,
                start,
                end: start + len,
            };
            start += len;
            p
        })
        .collect())
}

/// A worker's nearest unit, or the padding sentinel `(+∞, None)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub distance: f64,
    pub unit: Option<usize>,
}

impl Candidate {
    pub const SENTINEL: Candidate = Candidate {
        distance: f64::INFINITY,
        unit: None,
    };

    pub fn is_sentinel(&self) -> bool {
        self.unit.is_none()
    }

    /// Lower distance wins, then lower unit index; sentinels always lose.
    fn beats(&self, other: &Candidate) -> bool {
        match (self.unit, other.unit) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(a), Some(b)) => {
                self.distance < other.distance || (self.distance == other.distance && a < b)
            }
        }
    }
}

/// Nearest unit within `p`, accumulating each distance sequentially.
pub fn partial_bmu(x: &[f64], cb: &Codebook, p: &UnitPartition) -> Result<Candidate> {
    if x.len() != cb.dim() {
        return Err(SomError::DimensionMismatch {
            expected: cb.dim(),
            got: x.len(),
        });
    }
    if p.end > cb.n_units() {
        return Err(SomError::InvalidShape(format!(
            "partition [{}, {}) exceeds {} units",
            p.start,
            p.end,
            cb.n_units()
        )));
    }
    Ok(scan_partition(x, cb.weights(), 0, cb.dim(), p, Accumulation::Sequential))
}

/// `weights` starts at unit `first`: 0 for a whole codebook, `p.start` for a
/// worker's own slice.
fn scan_partition(
    x: &[f64],
    weights: &[f64],
    first: usize,
    dim: usize,
    p: &UnitPartition,
    acc: Accumulation,
) -> Candidate {
    match scan_units(x, weights, dim, p.start..p.end, first, acc) {
        Some((distance, unit)) => Candidate {
            distance,
            unit: Some(unit),
        },
        None => Candidate::SENTINEL,
    }
}

/// Pads `candidates` with sentinels to a power of two and reduces them in a
/// pairwise tournament.
pub fn reduce_min(candidates: &[Candidate]) -> Result<Candidate> {
    let width = candidates.len().max(1).next_power_of_two();
    let mut round: Vec<Candidate> = candidates.to_vec();
    round.resize(width, Candidate::SENTINEL);
    while round.len() > 1 {
        round = round
            .chunks_exact(2)
            .map(|pair| if pair[1].beats(&pair[0]) { pair[1] } else { pair[0] })
            .collect();
    }
    let winner = round[0];
    if winner.is_sentinel() {
        return Err(SomError::AllSentinels);
    }
    Ok(winner)
}

/// One neighborhood update with each worker writing only its own range.
/// Bit-identical to [`crate::som::update_step`].
pub fn parallel_update(
    cb: &mut Codebook,
    x: &[f64],
    winner: &BmuResult,
    t: u64,
    s: &TrainingSchedule,
    partitions: &[UnitPartition],
) -> Result<()> {
    if x.len() != cb.dim() {
        return Err(SomError::DimensionMismatch {
            expected: cb.dim(),
            got: x.len(),
        });
    }
    check_cover(partitions, cb.n_units())?;
    let dim = cb.dim();
    let decayed = s.at(t);
    let positions = cb.positions().to_vec();
    let writes: Vec<AtomicUsize> = (0..cb.n_units()).map(|_| AtomicUsize::new(0)).collect();
    let chunks = split_by_partition(cb.weights_mut(), partitions, dim);
    thread::scope(|scope| {
        for (p, chunk) in partitions.iter().zip(chunks) {
            let positions = &positions;
            let writes = &writes;
            scope.spawn(move || {
                for u in p.start..p.end {
                    let local = u - p.start;
                    let h = activation(positions, u, winner.index, &decayed);
                    update_unit(&mut chunk[local * dim..(local + 1) * dim], x, h);
                    writes[u].fetch_add(1, Ordering::Relaxed);
                }
            });
        }
    });
    debug_assert!(
        writes.iter().all(|w| w.load(Ordering::Relaxed) == 1),
        "every unit must be written exactly once"
    );
    Ok(())
}

fn check_cover(partitions: &[UnitPartition], nn: usize) -> Result<()> {
    let mut next = 0;
    for p in partitions {
        if p.start != next || p.end < p.start {
            return Err(SomError::InvalidShape("partitions must be contiguous and ordered".into()));
        }
        next = p.end;
    }
    if next != nn {
        return Err(SomError::InvalidShape(format!("partitions cover {next} of {nn} units")));
    }
    Ok(())
}

fn split_by_partition<'a>(mut weights: &'a mut [f64], partitions: &[UnitPartition], dim: usize) -> Vec<&'a mut [f64]> {
    let mut out = Vec::with_capacity(partitions.len());
    for p in partitions {
        let (head, tail) = std::mem::take(&mut weights).split_at_mut(p.len() * dim);
        out.push(head);
        weights = tail;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Sequential per-unit accumulation: output identical to the serial trainer.
    Strict,
    /// Reassociated accumulation: faster, equal to serial only within rounding.
    Fast,
}

impl Mode {
    fn accumulation(self) -> Accumulation {
        match self {
            Mode::Strict => Accumulation::Sequential,
            Mode::Fast => Accumulation::Reassociated,
        }
    }

    pub fn engine(self) -> Engine {
        match self {
            Mode::Strict => Engine::ParallelStrict,
            Mode::Fast => Engine::ParallelFast,
        }
    }
}

/// Available hardware parallelism.
pub fn default_workers() -> usize {
    thread::available_parallelism().map_or(1, usize::from)
}

/// Trains from the principal-plane initialization on `workers` threads
/// (clamped to the unit count).
pub fn train_parallel(
    data: &DocTermMatrix,
    g: &MapGeometry,
    s: &TrainingSchedule,
    workers: usize,
    mode: Mode,
) -> Result<TrainedMap> {
    if workers == 0 {
        return Err(SomError::InvalidWorkerCount);
    }
    let init = linear_init(data, g)?;
    train_parallel_from(data, init, g, s, workers, mode)
}

pub fn train_parallel_from(
    data: &DocTermMatrix,
    mut cb: Codebook,
    g: &MapGeometry,
    s: &TrainingSchedule,
    workers: usize,
    mode: Mode,
) -> Result<TrainedMap> {
    if workers == 0 {
        return Err(SomError::InvalidWorkerCount);
    }
    s.validate()?;
    if cb.dim() != data.n_cols() {
        return Err(SomError::DimensionMismatch {
            expected: cb.dim(),
            got: data.n_cols(),
        });
    }
    let mut samples = SampleStream::new(data, s.seed)?;
    let workers = workers.min(cb.n_units());
    let partitions = partition_units(cb.n_units(), workers)?;
    let dim = cb.dim();
    let positions = cb.positions().to_vec();

    let shared = Shared {
        data,
        schedule: s,
        positions: &positions,
        dim,
        accumulation: mode.accumulation(),
        barrier: SpinBarrier::new(workers),
        sample: [AtomicUsize::new(0), AtomicUsize::new(0)],
        slots: [slot_row(workers), slot_row(workers)],
        posted: AtomicUsize::new(0),
    };

    let start = Instant::now();
    if s.iterations > 0 {
        shared.sample[0].store(samples.next_row(), Ordering::Relaxed);
        let mut chunks = split_by_partition(cb.weights_mut(), &partitions, dim).into_iter();
        let coordinator_chunk = chunks.next().expect("at least one partition");
        thread::scope(|scope| {
            for (p, chunk) in partitions[1..].iter().zip(chunks) {
                let shared = &shared;
                scope.spawn(move || shared.run_worker(p, chunk, None));
            }
            shared.run_worker(&partitions[0], coordinator_chunk, Some(&mut samples));
        });
    }
    let wall = start.elapsed().as_secs_f64();

    TrainedMap::finish(data, cb, g, s, mode.engine(), wall)
}

/// Candidate slot: distance bits and `unit + 1` (0 marks the sentinel).
struct Slot {
    distance: AtomicU64,
    unit: AtomicUsize,
}

fn slot_row(n: usize) -> Vec<Slot> {
    (0..n)
        .map(|_| Slot {
            distance: AtomicU64::new(f64::INFINITY.to_bits()),
            unit: AtomicUsize::new(0),
        })
        .collect()
}

struct Shared<'a> {
    data: &'a DocTermMatrix,
    schedule: &'a TrainingSchedule,
    positions: &'a [(f64, f64)],
    dim: usize,
    accumulation: Accumulation,
    barrier: SpinBarrier,
    /// Sample row for iteration `t` lives in `sample[t % 2]`.
    sample: [AtomicUsize; 2],
    /// Candidates for iteration `t` live in `slots[t % 2]`.
    slots: [Vec<Slot>; 2],
    /// Total candidates posted so far; checks phase ordering.
    posted: AtomicUsize,
}

impl Shared<'_> {
    /// Worker loop. The coordinator (the caller's thread) also draws samples.
    fn run_worker(&self, p: &UnitPartition, weights: &mut [f64], mut sampler: Option<&mut SampleStream>) {
        let dim = self.dim;
        let workers = self.slots[0].len();
        let mut x = vec![0.0; dim];
        let mut candidates = vec![Candidate::SENTINEL; workers];
        for t in 0..self.schedule.iterations {
            let parity = (t % 2) as usize;
            // read-only per-worker copy of the input vector
            let row = self.sample[parity].load(Ordering::Relaxed);
            self.data.densify_row_into(row, &mut x);

            let mine = scan_partition(&x, weights, p.start, dim, p, self.accumulation);
            let slot = &self.slots[parity][p.worker];
            slot.distance.store(mine.distance.to_bits(), Ordering::Relaxed);
            slot.unit.store(mine.unit.map_or(0, |u| u + 1), Ordering::Relaxed);
            self.posted.fetch_add(1, Ordering::Relaxed);

            if let Some(sampler) = sampler.as_deref_mut() {
                if t + 1 < self.schedule.iterations {
                    self.sample[1 - parity].store(sampler.next_row(), Ordering::Relaxed);
                }
            }

            self.barrier.wait();
            debug_assert!(
                self.posted.load(Ordering::Relaxed) >= (t as usize + 1) * workers,
                "update phase entered before every candidate was posted"
            );

            for (c, s) in candidates.iter_mut().zip(&self.slots[parity]) {
                *c = Candidate {
                    distance: f64::from_bits(s.distance.load(Ordering::Relaxed)),
                    unit: s.unit.load(Ordering::Relaxed).checked_sub(1),
                };
            }
            let winner = reduce_min(&candidates)
                .expect("at least one worker owns units")
                .unit
                .unwrap();

            let decayed = self.schedule.at(t);
            for u in p.start..p.end {
                let local = u - p.start;
                let h = activation(self.positions, u, winner, &decayed);
                update_unit(&mut weights[local * dim..(local + 1) * dim], &x, h);
            }
        }
    }
}

/// Sense-reversing barrier that spins briefly, then yields, so it stays
/// usable when workers outnumber cores.
struct SpinBarrier {
    n: usize,
    arrived: AtomicUsize,
    generation: AtomicUsize,
}

impl SpinBarrier {
    fn new(n: usize) -> Self {
        Self {
            n,
            arrived: AtomicUsize::new(0),
            generation: AtomicUsize::new(0),
        }
    }

    fn wait(&self) {
        if self.n == 1 {
            return;
        }
        let gen = self.generation.load(Ordering::Acquire);
        if self.arrived.fetch_add(1, Ordering::AcqRel) + 1 == self.n {
            self.arrived.store(0, Ordering::Relaxed);
            self.generation.fetch_add(1, Ordering::Release);
            return;
        }
        let mut spins = 0u32;
        while self.generation.load(Ordering::Acquire) == gen {
            if spins < 64 {
                hint::spin_loop();
                spins += 1;
            } else {
                thread::yield_now();
            }
        }
    }
}
