//! Node coloring, labeling and SVG rendering of trained maps.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Severity, Vocabulary};
use crate::error::{Result, SomError};
use crate::som::pca::{principal_components, DenseRows};
use crate::som::{hex_position, BmuResult, Codebook, MapGeometry};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeverityLabel {
    Moderate,
    Severe,
    Mixed,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeDecoration {
    pub unit_index: usize,
    pub color: Rgb,
    pub severity_label: SeverityLabel,
    /// Documents mapped to the unit, labeled or not.
    pub doc_count: usize,
    /// Descending weight.
    pub top_terms: Vec<TermWeight>,
}

/// Projects each prototype onto the codebook's top three principal
/// components and scales each to 0..=255. Components without variance map
/// to 128.
pub fn similarity_colors(cb: &Codebook) -> Vec<Rgb> {
    let nn = cb.n_units();
    let mut colors = vec![[128u8; 3]; nn];
    let rows = DenseRows {
        data: cb.weights(),
        dim: cb.dim(),
    };
    // fewer than two prototypes: nothing to contrast
    let Ok(pcs) = principal_components(&rows, 3) else {
        return colors;
    };
    for (channel, (&lambda, v)) in pcs.eigenvalues.iter().zip(&pcs.vectors).enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let proj: Vec<f64> = (0..nn)
            .map(|u| {
                cb.unit(u)
                    .iter()
                    .zip(&pcs.mean)
                    .zip(v)
                    .map(|((w, m), e)| (w - m) * e)
                    .sum()
            })
            .collect();
        let lo = proj.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = proj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        if !(span > 0.0) {
            continue;
        }
        for (c, p) in colors.iter_mut().zip(&proj) {
            c[channel] = (255.0 * (p - lo) / span).round().clamp(0.0, 255.0) as u8;
        }
    }
    colors
}

/// Majority severity per unit plus the number of documents mapped to it.
/// `severities[i]` belongs to the document behind `assignments[i]`.
pub fn node_labels(
    assignments: &[BmuResult],
    severities: &[Option<Severity>],
    n_units: usize,
) -> Result<Vec<(SeverityLabel, usize)>> {
    if assignments.len() != severities.len() {
        return Err(SomError::DimensionMismatch {
            expected: assignments.len(),
            got: severities.len(),
        });
    }
    let mut tally = vec![(0usize, 0usize, 0usize); n_units];
    for (a, sev) in assignments.iter().zip(severities) {
        let slot = tally.get_mut(a.index).ok_or_else(|| {
            SomError::InvalidShape(format!("assignment to unit {} of {n_units}", a.index))
        })?;
        slot.2 += 1;
        match sev {
            Some(Severity::Moderate) => slot.0 += 1,
            Some(Severity::Severe) => slot.1 += 1,
            None => {}
        }
    }
    Ok(tally
        .into_iter()
        .map(|(moderate, severe, docs)| {
            let label = match moderate.cmp(&severe) {
                Ordering::Greater => SeverityLabel::Moderate,
                Ordering::Less => SeverityLabel::Severe,
                Ordering::Equal if moderate == 0 => SeverityLabel::None,
                Ordering::Equal => SeverityLabel::Mixed,
            };
            (label, docs)
        })
        .collect())
}

/// The `k` largest positive weights of each prototype, ties broken by term.
pub fn top_terms(cb: &Codebook, vocab: &Vocabulary, k: usize) -> Result<Vec<Vec<TermWeight>>> {
    if vocab.len() != cb.dim() {
        return Err(SomError::DimensionMismatch {
            expected: cb.dim(),
            got: vocab.len(),
        });
    }
    if k == 0 {
        return Err(SomError::InvalidShape("top-term count must be positive".into()));
    }
    Ok((0..cb.n_units())
        .map(|u| {
            let mut dims: Vec<(usize, f64)> = cb
                .unit(u)
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, w)| w > 0.0)
                .collect();
            let by_rank = |a: &(usize, f64), b: &(usize, f64)| {
                b.1.total_cmp(&a.1).then_with(|| vocab.term(a.0).cmp(vocab.term(b.0)))
            };
            if dims.len() > k {
                dims.select_nth_unstable_by(k - 1, by_rank);
                dims.truncate(k);
            }
            dims.sort_by(by_rank);
            dims.into_iter()
                .map(|(d, weight)| TermWeight {
                    term: vocab.term(d).to_string(),
                    weight,
                })
                .collect()
        })
        .collect())
}

/// Assembles per-unit decorations. Without a vocabulary the term lists are empty.
pub fn decorate(
    cb: &Codebook,
    assignments: &[BmuResult],
    severities: &[Option<Severity>],
    vocab: Option<&Vocabulary>,
    k: usize,
) -> Result<Vec<NodeDecoration>> {
    let colors = similarity_colors(cb);
    let labels = node_labels(assignments, severities, cb.n_units())?;
    let terms = match vocab {
        Some(v) => top_terms(cb, v, k)?,
        None => vec![Vec::new(); cb.n_units()],
    };
    Ok(colors
        .into_iter()
        .zip(labels)
        .zip(terms)
        .enumerate()
        .map(|(unit_index, ((color, (severity_label, doc_count)), top_terms))| NodeDecoration {
            unit_index,
            color,
            severity_label,
            doc_count,
            top_terms,
        })
        .collect())
}

pub fn decorations_json(decorations: &[NodeDecoration]) -> String {
    serde_json::to_string_pretty(decorations).expect("decorations serialize")
}

#[derive(Debug, Clone)]
pub struct SvgOptions {
    /// Distance in pixels between neighboring hexagon centers.
    pub cell_size: f64,
    pub margin: f64,
    pub show_counts: bool,
    pub title: Option<String>,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            cell_size: 40.0,
            margin: 10.0,
            show_counts: false,
            title: None,
        }
    }
}

/// Pointy-top hexagon map, one polygon per unit in flat-index order. Fill is
/// the node color; the border encodes severity.
pub fn render_svg(g: &MapGeometry, decorations: &[NodeDecoration], opts: &SvgOptions) -> Result<String> {
    let nn = g.nn();
    if decorations.len() != nn {
        return Err(SomError::DimensionMismatch {
            expected: nn,
            got: decorations.len(),
        });
    }
    let cell = opts.cell_size;
    let radius = cell / 3f64.sqrt();
    let odd_shift = if g.nrows > 1 { 0.5 } else { 0.0 };
    let width = (g.ncols as f64 + odd_shift) * cell + 2.0 * opts.margin;
    let height = (g.nrows.saturating_sub(1) as f64 * 3f64.sqrt() / 2.0) * cell + 2.0 * radius + 2.0 * opts.margin;
    let origin = (opts.margin + cell / 2.0, opts.margin + radius);

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width:.2}\" height=\"{height:.2}\" viewBox=\"0 0 {width:.2} {height:.2}\">"
    );
    if let Some(title) = &opts.title {
        let _ = writeln!(svg, "<title>{}</title>", escape(title));
    }
    svg.push_str("<g class=\"units\">\n");
    for d in decorations {
        let (row, col) = (d.unit_index / g.ncols, d.unit_index % g.ncols);
        let (hx, hy) = hex_position(row, col);
        let (cx, cy) = (origin.0 + hx * cell, origin.1 + hy * cell);
        let points: Vec<String> = (0..6)
            .map(|k| {
                let a = (60.0 * k as f64 - 90.0).to_radians();
                format!("{:.2},{:.2}", cx + radius * a.cos(), cy + radius * a.sin())
            })
            .collect();
        let [r, gr, b] = d.color;
        let stroke = match d.severity_label {
            SeverityLabel::Severe => "stroke=\"#000000\" stroke-width=\"3\"",
            SeverityLabel::Moderate => "stroke=\"#000000\" stroke-width=\"1\"",
            SeverityLabel::Mixed => "stroke=\"#000000\" stroke-width=\"1.5\" stroke-dasharray=\"4 2\"",
            SeverityLabel::None => "stroke=\"none\"",
        };
        let terms: Vec<&str> = d.top_terms.iter().map(|t| t.term.as_str()).collect();
        let _ = writeln!(
            svg,
            "<polygon id=\"unit-{}\" class=\"{}\" points=\"{}\" fill=\"rgb({r},{gr},{b})\" {stroke}><title>{}</title></polygon>",
            d.unit_index,
            label_name(d.severity_label),
            points.join(" "),
            escape(&format!("unit {} ({row},{col}) docs {}: {}", d.unit_index, d.doc_count, terms.join(", "))),
        );
        if opts.show_counts {
            let luminance = 0.299 * r as f64 + 0.587 * gr as f64 + 0.114 * b as f64;
            let ink = if luminance > 140.0 { "#000000" } else { "#ffffff" };
            let _ = writeln!(
                svg,
                "<text x=\"{cx:.2}\" y=\"{cy:.2}\" font-size=\"{:.1}\" text-anchor=\"middle\" dominant-baseline=\"central\" fill=\"{ink}\">{}</text>",
                cell * 0.3,
                d.doc_count
            );
        }
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

fn label_name(l: SeverityLabel) -> &'static str {
    match l {
        SeverityLabel::Moderate => "moderate",
        SeverityLabel::Severe => "severe",
        SeverityLabel::Mixed => "mixed",
        SeverityLabel::None => "none",
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && !matches!(c, '\t' | '\n' | '\r') => {}
            c => out.push(c),
        }
    }
    out
}
