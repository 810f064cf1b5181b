mod common;

use hexsom::bench::synth_corpus;
use hexsom::corpus::{DocTermMatrix, Weighting};
use hexsom::som::pca::{principal_components, SparseRows};
use hexsom::som::{map_geometry, train_serial, Codebook, MapGeometry, TrainingSchedule};
use hexsom::viz::{decorate, render_svg, similarity_colors, SvgOptions};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn eigenvalues_match_dense_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..8).map(|_| rng.gen_range(0.01..1.0)).collect()).collect();
    let data = DocTermMatrix::from_dense(&rows, Weighting::Tf).unwrap();
    let pcs = principal_components(&SparseRows::nonzero(&data), 8).unwrap();

    let x = DMatrix::from_fn(50, 8, |i, j| rows[i][j]);
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(50, 8, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / 49.0;
    let mut oracle: Vec<f64> = cov.symmetric_eigen().eigenvalues.iter().copied().collect();
    oracle.sort_by(|a, b| b.total_cmp(a));

    for (got, want) in pcs.eigenvalues.iter().zip(&oracle) {
        assert!((got - want).abs() <= 1e-6 * want.abs().max(1e-300), "{got} vs {want}");
    }
}

#[test]
fn gaussian_clusters_stay_together() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let centers = [(1.0, 1.0), (9.0, 1.0), (5.0, 9.0)];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..40 {
            // Box-Muller, sd 0.4
            let (u1, u2): (f64, f64) = (1.0 - rng.gen::<f64>(), rng.gen());
            let r = (-2.0 * u1.ln()).sqrt() * 0.4;
            let th = std::f64::consts::TAU * u2;
            rows.push(vec![cx + r * th.cos() + 1.0, cy + r * th.sin() + 1.0]);
            labels.push(c);
        }
    }
    let data = DocTermMatrix::from_dense(&rows, Weighting::Tf).unwrap();
    let g = map_geometry(120, &data).unwrap().with_override(6, 6, 5000).unwrap();
    let mut s = TrainingSchedule::for_geometry(&g, 11);
    s.alpha0 = 0.3;
    let map = train_serial(&data, &g, &s).unwrap();
    let (intra, inter) = common::cluster_separation(&map, &labels);
    assert!(intra < inter, "intra {intra} inter {inter}");
}

#[test]
fn synthetic_clusters_are_separable() {
    let (data, ids) = synth_corpus(3, 100, 300, 0.9, 17).unwrap();
    let dense = data.to_dense();
    let mut centroids = vec![vec![0.0; 300]; 3];
    for (row, &c) in dense.iter().zip(&ids) {
        for (a, v) in centroids[c].iter_mut().zip(row) {
            *a += v / 100.0;
        }
    }
    let hits = dense
        .iter()
        .zip(&ids)
        .filter(|(row, &c)| {
            let d = |k: usize| row.iter().zip(&centroids[k]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
            (0..3).min_by(|&a, &b| d(a).total_cmp(&d(b))).unwrap() == c
        })
        .count();
    assert!(hits as f64 >= 0.95 * 300.0, "{hits}/300");
}

#[test]
fn random_codebook_colors_track_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let w: Vec<f64> = (0..6 * 7 * 10).map(|_| rng.gen()).collect();
        let cb = Codebook::new(6, 7, 10, w).unwrap();
        let rho = common::color_rank_correlation(&cb, &similarity_colors(&cb));
        assert!(rho > 0.0, "spearman {rho}");
    }
}

#[test]
fn spearman_helper_sanity() {
    assert!((common::spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
    assert!((common::spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    assert_eq!(common::ranks(&[5.0, 1.0, 5.0]), [2.5, 1.0, 2.5]);
}

#[test]
fn odd_rows_are_offset_by_half_a_cell() {
    let g = MapGeometry::from_eigenvalues(4, 1.0, 1.0).unwrap().with_override(2, 2, 1).unwrap();
    let cb = Codebook::new(2, 2, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let decorations = decorate(&cb, &[], &[], None, 1).unwrap();
    let svg = render_svg(&g, &decorations, &SvgOptions::default()).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let first_x = |id: &str| -> f64 {
        let node = doc.descendants().find(|n| n.attribute("id") == Some(id)).unwrap();
        let pts = node.attribute("points").unwrap();
        pts.split(' ').next().unwrap().split(',').next().unwrap().parse().unwrap()
    };
    // top vertex sits above the center
    assert!((first_x("unit-2") - first_x("unit-0") - 20.0).abs() < 1e-9);
    assert!((first_x("unit-1") - first_x("unit-0") - 40.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn svg_always_parses(nrows in 1usize..7, ncols in 1usize..7, seed in any::<u64>(), counts in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nn = nrows * ncols;
        let cb = Codebook::new(nrows, ncols, 3, (0..nn * 3).map(|_| rng.gen()).collect()).unwrap();
        let g = MapGeometry::from_eigenvalues(4, 1.0, 1.0).unwrap().with_override(nrows, ncols, 1).unwrap();
        let decorations = decorate(&cb, &[], &[], None, 1).unwrap();
        let opts = SvgOptions { show_counts: counts, title: Some("<map & \"x\">".into()), ..Default::default() };
        let svg = render_svg(&g, &decorations, &opts).unwrap();
        prop_assert_eq!(common::svg_polygon_count(&svg).unwrap(), nn);
    }
}
