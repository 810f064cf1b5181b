#![allow(dead_code)]

use std::path::Path;

use hexsom::corpus::{DocTermMatrix, Weighting};
use hexsom::som::{grid_distance, Codebook, TrainedMap};
use hexsom::viz::Rgb;

/// 1-based ranks with ties sharing their average rank.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va * vb).sqrt()
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn color_dist(a: &Rgb, b: &Rgb) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Rank correlation between prototype distance and color distance over all
/// unit pairs.
pub fn color_rank_correlation(cb: &Codebook, colors: &[Rgb]) -> f64 {
    let mut proto = Vec::new();
    let mut color = Vec::new();
    for a in 0..cb.n_units() {
        for b in a + 1..cb.n_units() {
            proto.push(euclid(cb.unit(a), cb.unit(b)));
            color.push(color_dist(&colors[a], &colors[b]));
        }
    }
    spearman(&proto, &color)
}

/// Over lattice-adjacent pairs: (mean color distance of the 10% closest
/// prototype pairs, same for the 10% farthest).
pub fn color_locality(cb: &Codebook, colors: &[Rgb]) -> (f64, f64) {
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for a in 0..cb.n_units() {
        for b in a + 1..cb.n_units() {
            if (cb.lattice_distance(a, b) - 1.0).abs() < 1e-9 {
                pairs.push((euclid(cb.unit(a), cb.unit(b)), color_dist(&colors[a], &colors[b])));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let tenth = (pairs.len() / 10).max(1);
    let mean = |s: &[(f64, f64)]| s.iter().map(|p| p.1).sum::<f64>() / s.len() as f64;
    (mean(&pairs[..tenth]), mean(&pairs[pairs.len() - tenth..]))
}

/// Mean BMU lattice distance over same-label and different-label document
/// pairs.
pub fn cluster_separation(map: &TrainedMap, labels: &[usize]) -> (f64, f64) {
    let (mut intra, mut n_intra, mut inter, mut n_inter) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..labels.len() {
        for j in i + 1..labels.len() {
            let a = &map.assignments[i];
            let b = &map.assignments[j];
            let d = grid_distance((a.row, a.col), (b.row, b.col));
            if labels[i] == labels[j] {
                intra += d;
                n_intra += 1;
            } else {
                inter += d;
                n_inter += 1;
            }
        }
    }
    (intra / n_intra as f64, inter / n_inter as f64)
}

pub fn svg_polygon_count(svg: &str) -> Result<usize, String> {
    let doc = roxmltree::Document::parse(svg).map_err(|e| e.to_string())?;
    Ok(doc.descendants().filter(|n| n.has_tag_name("polygon")).count())
}

/// Iris measurements, each feature min-max scaled to [0, 1], with species ids.
pub fn iris() -> (DocTermMatrix, Vec<usize>) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/iris.csv");
    let text = std::fs::read_to_string(path).expect("iris fixture");
    let mut rows = Vec::new();
    let mut species = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let fields: Vec<f64> = line.split(',').map(|f| f.trim().parse().unwrap()).collect();
        rows.push(fields[..4].to_vec());
        species.push(fields[4] as usize);
    }
    for c in 0..4 {
        let lo = rows.iter().map(|r| r[c]).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max);
        for r in &mut rows {
            r[c] = (r[c] - lo) / (hi - lo);
        }
    }
    (DocTermMatrix::from_dense(&rows, Weighting::Tf).unwrap(), species)
}
