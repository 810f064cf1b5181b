use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hexsom::bench::{compare_engines, scaling_study, synth_corpus, ScalingConfig};
use hexsom::corpus::{parse_stopwords, read_dtm, read_jsonl, write_dtm, Corpus, DtmFile, TokenizerConfig, Weighting};
use hexsom::parallel::{default_workers, train_parallel, Mode};
use hexsom::som::{assign as assign_rows, map_geometry, read_som, train_serial, write_som, Engine, MapGeometry, TrainedMap, TrainingSchedule};
use hexsom::viz::{decorate, decorations_json, render_svg, SvgOptions};
use hexsom::SomError;
use serde_json::json;

use crate::config::{usage, Config};
use crate::{AssignArgs, BenchArgs, DtmArgs, IngestArgs, MapOverride, TrainArgs, VizArgs};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => io::stdout().write_all(text.as_bytes()).context("cannot write to stdout"),
    }
}

fn load_corpus(path: &Path) -> Result<Corpus> {
    serde_json::from_reader(open(path)?).with_context(|| format!("{} is not a corpus file", path.display()))
}

fn load_dtm(path: &Path) -> Result<DtmFile> {
    read_dtm(open(path)?).with_context(|| format!("cannot read matrix {}", path.display()))
}

fn load_map(path: &Path) -> Result<TrainedMap> {
    read_som(open(path)?).with_context(|| format!("cannot read map {}", path.display()))
}

/// Flag, then config key, then SOM_WORKERS, then available cores.
fn workers(flag: Option<usize>, cfg: &Config) -> Result<usize> {
    let n = match cfg.pick(flag, "workers")? {
        Some(n) => n,
        None => match std::env::var("SOM_WORKERS") {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| usage(format!("SOM_WORKERS must be a positive integer, got {v:?}")))?,
            Err(_) => default_workers(),
        },
    };
    if n == 0 {
        return Err(usage("worker count must be positive"));
    }
    Ok(n)
}

/// Explicit rows, cols and iters, or none of them.
fn map_override(m: &MapOverride, cfg: &Config) -> Result<Option<(usize, usize, u64)>> {
    let rows = cfg.pick(m.rows, "rows")?;
    let cols = cfg.pick(m.cols, "cols")?;
    let iters = cfg.pick(m.iters, "iters")?;
    match (rows, cols, iters) {
        (None, None, None) => Ok(None),
        (Some(r), Some(c), Some(i)) => Ok(Some((r, c, i))),
        _ => Err(usage("--rows, --cols and --iters must be given together")),
    }
}

fn geometry(data: &hexsom::corpus::DocTermMatrix, over: Option<(usize, usize, u64)>) -> Result<MapGeometry> {
    let m = data.nonzero_rows().len();
    if m == 0 {
        return Err(SomError::EmptyData.into());
    }
    let auto = map_geometry(m, data)?;
    Ok(match over {
        Some((r, c, i)) => auto.with_override(r, c, i)?,
        None => auto,
    })
}

pub fn ingest(a: &IngestArgs, cfg: &Config) -> Result<()> {
    let input: PathBuf = cfg.require(a.input.clone(), "input")?;
    let output: PathBuf = cfg.require(a.output.clone(), "output")?;
    let mut tok = TokenizerConfig::default();
    if let Some(path) = cfg.pick::<PathBuf>(a.stopwords.clone(), "stopwords")? {
        let text = std::fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
        tok.stopwords = parse_stopwords(&text);
    }
    tok.stem = cfg.flag(a.stem, "stem")?;
    if let Some(n) = cfg.pick(a.min_token_len, "min-token-len")? {
        tok.min_token_len = n;
    }

    let docs = read_jsonl(open(&input)?).with_context(|| format!("in {}", input.display()))?;
    let corpus = Corpus::from_documents(&docs, &tok)?;
    let mut out = create(&output)?;
    serde_json::to_writer(&mut out, &corpus)?;
    out.flush()?;
    println!("{} documents, {} terms", corpus.documents.len(), corpus.vocabulary.len());
    Ok(())
}

pub fn dtm(a: &DtmArgs, cfg: &Config) -> Result<()> {
    let input: PathBuf = cfg.require(a.input.clone(), "input")?;
    let output: PathBuf = cfg.require(a.output.clone(), "output")?;
    let weighting = cfg.pick(a.weighting, "weighting")?.unwrap_or(Weighting::Tfidf);

    let corpus = load_corpus(&input)?;
    let (matrix, zero_rows) = corpus.document_term_matrix(weighting)?;
    if zero_rows > 0 {
        eprintln!("warning: {zero_rows} of {} documents have all-zero vectors", matrix.n_rows());
    }
    let mut out = create(&output)?;
    write_dtm(&mut out, &matrix, &corpus.vocabulary)?;
    println!("{}x{} matrix, {} nonzeros", matrix.n_rows(), matrix.n_cols(), matrix.nnz());
    Ok(())
}

pub fn train(a: &TrainArgs, cfg: &Config) -> Result<()> {
    let input: PathBuf = cfg.require(a.input.clone(), "input")?;
    let output: PathBuf = cfg.require(a.output.clone(), "output")?;
    let over = map_override(&a.map, cfg)?;
    let seed = cfg.pick(a.seed, "seed")?.unwrap_or(0);
    let engine = cfg.pick(a.engine, "engine")?.unwrap_or(Engine::Serial);
    let workers = workers(a.workers, cfg)?;

    let data = load_dtm(&input)?.matrix;
    let g = geometry(&data, over)?;
    let mut s = TrainingSchedule::for_geometry(&g, seed);
    if let Some(alpha0) = cfg.pick(a.alpha0, "alpha0")? {
        s.alpha0 = alpha0;
    }
    if let Some(sigma0) = cfg.pick(a.sigma0, "sigma0")? {
        s.sigma0 = sigma0;
    }
    s.validate().map_err(|e| usage(e.to_string()))?;

    let map = match engine {
        Engine::Serial => train_serial(&data, &g, &s)?,
        Engine::ParallelStrict => train_parallel(&data, &g, &s, workers, Mode::Strict)?,
        Engine::ParallelFast => train_parallel(&data, &g, &s, workers, Mode::Fast)?,
    };
    let mut out = create(&output)?;
    write_som(&mut out, &map)?;

    let meta = json!({
        "engine": map.engine,
        "workers": if engine == Engine::Serial { 1 } else { workers.min(g.nn()) },
        "wall_seconds": map.wall_seconds,
        "quantization_error": map.quantization_error,
        "nrows": g.nrows,
        "ncols": g.ncols,
        "iterations": s.iterations,
        "seed": seed,
    });
    let meta_path = PathBuf::from(format!("{}.meta.json", output.display()));
    std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)
        .with_context(|| format!("cannot write {}", meta_path.display()))?;

    println!(
        "{}x{} map, {} iterations, engine {}: qe {:.6}, wall {:.3}s",
        g.nrows, g.ncols, s.iterations, map.engine, map.quantization_error, map.wall_seconds
    );
    Ok(())
}

fn ids_for(corpus: Option<&Corpus>, rows: usize) -> Result<Vec<String>> {
    match corpus {
        Some(c) if c.documents.len() != rows => Err(usage(format!(
            "corpus has {} documents but the matrix has {rows} rows",
            c.documents.len()
        ))),
        Some(c) => Ok(c.documents.iter().map(|d| d.id.clone()).collect()),
        None => Ok((0..rows).map(|i| i.to_string()).collect()),
    }
}

pub fn assign(a: &AssignArgs, cfg: &Config) -> Result<()> {
    let map_path: PathBuf = cfg.require(a.map.clone(), "map")?;
    let input: PathBuf = cfg.require(a.input.clone(), "input")?;
    let corpus = cfg.pick::<PathBuf>(a.corpus.clone(), "corpus")?.map(|p| load_corpus(&p)).transpose()?;
    let output = cfg.pick::<PathBuf>(a.output.clone(), "output")?;

    let map = load_map(&map_path)?;
    let data = load_dtm(&input)?.matrix;
    let assignments = assign_rows(&data, &map.codebook)?;
    let ids = ids_for(corpus.as_ref(), data.n_rows())?;

    let mut csv = String::from("document,unit,row,col,distance\n");
    for (id, b) in ids.iter().zip(&assignments) {
        csv.push_str(&format!("{},{},{},{},{}\n", csv_field(id), b.index, b.row, b.col, b.distance));
    }
    write_text(output.as_deref(), &csv)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn viz(a: &VizArgs, cfg: &Config) -> Result<()> {
    let map_path: PathBuf = cfg.require(a.map.clone(), "map")?;
    let input: PathBuf = cfg.require(a.input.clone(), "input")?;
    let svg_path: PathBuf = cfg.require(a.svg.clone(), "svg")?;
    let json_path = cfg.pick::<PathBuf>(a.json.clone(), "json")?;
    let corpus = cfg.pick::<PathBuf>(a.corpus.clone(), "corpus")?.map(|p| load_corpus(&p)).transpose()?;
    let k = cfg.pick(a.top_terms, "top-terms")?.unwrap_or(5);
    let defaults = SvgOptions::default();
    let opts = SvgOptions {
        cell_size: cfg.pick(a.cell_size, "cell-size")?.unwrap_or(defaults.cell_size),
        show_counts: cfg.flag(a.show_counts, "show-counts")?,
        title: cfg.pick(a.title.clone(), "title")?,
        ..defaults
    };
    if k == 0 {
        return Err(usage("--top-terms must be positive"));
    }
    if !(opts.cell_size > 0.0) {
        return Err(usage("--cell-size must be positive"));
    }

    let map = load_map(&map_path)?;
    let DtmFile { matrix, vocabulary } = load_dtm(&input)?;
    let assignments = assign_rows(&matrix, &map.codebook)?;
    let severities = match &corpus {
        Some(c) if c.documents.len() != matrix.n_rows() => {
            return Err(usage(format!(
                "corpus has {} documents but the matrix has {} rows",
                c.documents.len(),
                matrix.n_rows()
            )))
        }
        Some(c) => c.severities(),
        None => vec![None; matrix.n_rows()],
    };
    let decorations = decorate(&map.codebook, &assignments, &severities, Some(&vocabulary), k)?;
    let svg = render_svg(&map.geometry, &decorations, &opts)?;
    write_text(Some(&svg_path), &svg)?;
    if let Some(p) = json_path {
        write_text(Some(&p), &decorations_json(&decorations))?;
    }
    println!("{} units rendered to {}", decorations.len(), svg_path.display());
    Ok(())
}

fn parse_sides(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| usage(format!("bad map side {v:?}"))))
        .collect()
}

pub fn bench(a: &BenchArgs, cfg: &Config) -> Result<()> {
    let study: String = cfg.require(a.study.clone(), "study")?;
    let output = cfg.pick::<PathBuf>(a.output.clone(), "output")?;
    let seed = cfg.pick(a.seed, "seed")?.unwrap_or(0);
    let workers = workers(a.workers, cfg)?;

    let report = match study.as_str() {
        "parity" => {
            let over = map_override(&a.map, cfg)?;
            let (data, name) = match cfg.pick::<PathBuf>(a.input.clone(), "input")? {
                Some(p) => (load_dtm(&p)?.matrix, p.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned())),
                None => (synth_corpus(9, 57, 3917, 0.99, seed)?.0, "synthetic-513x3917".to_string()),
            };
            let g = geometry(&data, over)?;
            let s = TrainingSchedule::for_geometry(&g, seed);
            let report = compare_engines(&data, &name, &g, &s, workers)?;
            if let Err(e) = report.check_parity() {
                write_text(output.as_deref(), &report.to_csv())?;
                return Err(e.into());
            }
            report
        }
        "scaling" => {
            let sides = match &a.sides {
                Some(v) => v.clone(),
                None => match cfg.pick::<String>(None, "sides")? {
                    Some(s) => parse_sides(&s)?,
                    None => ScalingConfig::default().sides,
                },
            };
            if sides.is_empty() || sides.contains(&0) || sides.windows(2).any(|w| w[0] >= w[1]) {
                return Err(usage(format!("--sides must be positive and strictly ascending, got {sides:?}")));
            }
            let d = ScalingConfig::default();
            let sc = ScalingConfig {
                sides,
                dim: cfg.pick(a.dim, "dim")?.unwrap_or(d.dim),
                m: cfg.pick(a.samples, "samples")?.unwrap_or(d.m),
                iterations: cfg.pick(a.map.iters, "iters")?.unwrap_or(d.iterations),
                workers,
                seed,
                repeats: cfg.pick(a.repeats, "repeats")?.unwrap_or(d.repeats),
                engines: d.engines,
            };
            if sc.dim == 0 || sc.m == 0 {
                return Err(usage("--dim and --samples must be positive"));
            }
            scaling_study(&sc)?
        }
        other => return Err(usage(format!("unknown study {other:?} (expected parity or scaling)"))),
    };
    write_text(output.as_deref(), &report.to_csv())
}
