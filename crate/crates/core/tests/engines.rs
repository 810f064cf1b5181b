use hexsom::corpus::{l2_normalize, DocTermMatrix, Weighting};
use hexsom::parallel::{train_parallel, Mode};
use hexsom::som::{encode, map_geometry, train_serial, Engine, MapGeometry, TrainingSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sparse_data(m: usize, n: usize, seed: u64) -> DocTermMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            // every 17th document is empty
            (0..n)
                .map(|_| {
                    if i % 17 != 0 && rng.gen_bool(0.1) {
                        rng.gen_range(0.1..3.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    l2_normalize(&DocTermMatrix::from_dense(&rows, Weighting::Tfidf).unwrap()).0
}

#[test]
fn strict_matches_serial_bytes() {
    let data = sparse_data(60, 40, 1);
    let g = map_geometry(data.nonzero_rows().len(), &data)
        .unwrap()
        .with_override(5, 7, 1500)
        .unwrap();
    for seed in [0, 1, 42] {
        let s = TrainingSchedule::for_geometry(&g, seed);
        let serial = train_serial(&data, &g, &s).unwrap();
        let reference = encode(&serial);
        for workers in [1, 2, 3, 4, 8, 35, 64] {
            let par = train_parallel(&data, &g, &s, workers, Mode::Strict).unwrap();
            assert_eq!(par.engine, Engine::ParallelStrict);
            assert!(encode(&par) == reference, "seed {seed}, workers {workers}");
        }
    }
}

#[test]
fn fast_mode_stays_close() {
    let data = sparse_data(80, 300, 2);
    let g: MapGeometry = map_geometry(80, &data).unwrap().with_override(4, 6, 2000).unwrap();
    let s = TrainingSchedule::for_geometry(&g, 5);
    let serial = train_serial(&data, &g, &s).unwrap();
    let fast = train_parallel(&data, &g, &s, 3, Mode::Fast).unwrap();
    let rel = (fast.quantization_error - serial.quantization_error).abs() / serial.quantization_error;
    assert!(rel <= 1e-3, "relative QE gap {rel}");
    assert_eq!(fast.engine, Engine::ParallelFast);
}

#[test]
fn zero_rows_still_get_assigned() {
    let mut rows = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0], vec![0.5, 0.5, 0.7]];
    rows.push(vec![0.0; 3]);
    let (data, zeros) = l2_normalize(&DocTermMatrix::from_dense(&rows, Weighting::Tf).unwrap());
    assert_eq!(zeros, 2);
    let g = map_geometry(3, &data).unwrap();
    let s = TrainingSchedule::for_geometry(&g, 0);
    let a = train_serial(&data, &g, &s).unwrap();
    let b = train_parallel(&data, &g, &s, 2, Mode::Strict).unwrap();
    assert_eq!(a.assignments.len(), 5);
    assert_eq!(encode(&a), encode(&b));
}
