//! Python bindings: corpus preparation, map sizing, training on any engine,
//! assignment, visualization and the benchmark studies.

use std::fs::File;
use std::io::{BufReader, BufWriter, Cursor};

use hexsom::bench::{self, ScalingConfig};
use hexsom::corpus::{
    self, parse_stopwords, read_dtm, write_dtm, DocTermMatrix, Severity, TokenizerConfig, Vocabulary, Weighting,
};
use hexsom::parallel::{self, Mode};
use hexsom::som::{self, Engine, MapGeometry, TrainingSchedule};
use hexsom::viz::{self, SvgOptions};
use hexsom::SomError;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;

create_exception!(pyhexsom, HexsomError, PyException);

fn err(e: SomError) -> PyErr {
    match e {
        SomError::Io(io) => PyOSError::new_err(io.to_string()),
        other => HexsomError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = String>>(s: &str) -> PyResult<T> {
    s.parse().map_err(PyValueError::new_err)
}

fn severity(v: Option<u8>) -> PyResult<Option<Severity>> {
    v.map(Severity::try_from).transpose().map_err(PyValueError::new_err)
}

fn tokenizer(stem: bool, min_token_len: usize, stopwords: Option<&str>) -> TokenizerConfig {
    let mut cfg = match stopwords {
        Some(text) => TokenizerConfig::with_stopwords(parse_stopwords(text)),
        None => TokenizerConfig::default(),
    };
    cfg.stem = stem;
    cfg.min_token_len = min_token_len;
    cfg
}

#[pyfunction]
#[pyo3(signature = (text, stem=false, min_token_len=3))]
fn tokenize(text: &str, stem: bool, min_token_len: usize) -> Vec<String> {
    corpus::tokenize(text, &tokenizer(stem, min_token_len, None))
}

/// Tokenized documents plus their vocabulary.
#[pyclass(name = "Corpus", module = "pyhexsom")]
struct PyCorpus {
    inner: corpus::Corpus,
}

#[pymethods]
impl PyCorpus {
    /// Parses JSONL text, one {"id", "text", "severity"?} object per line.
    #[staticmethod]
    #[pyo3(signature = (text, stem=false, min_token_len=3, stopwords=None))]
    fn from_jsonl(text: &str, stem: bool, min_token_len: usize, stopwords: Option<&str>) -> PyResult<Self> {
        let docs = corpus::read_jsonl(Cursor::new(text)).map_err(err)?;
        let inner = corpus::Corpus::from_documents(&docs, &tokenizer(stem, min_token_len, stopwords)).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner.documents.iter().map(|d| d.id.clone()).collect()
    }

    #[getter]
    fn tokens(&self) -> Vec<Vec<String>> {
        self.inner.documents.iter().map(|d| d.tokens.clone()).collect()
    }

    #[getter]
    fn severities(&self) -> Vec<Option<u8>> {
        self.inner.severities().into_iter().map(|s| s.map(u8::from)).collect()
    }

    #[getter]
    fn vocabulary(&self) -> Vec<String> {
        self.inner.vocabulary.terms().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.documents.len()
    }

    /// L2-normalized matrix and the number of rows left all-zero.
    #[pyo3(signature = (weighting="tfidf"))]
    fn matrix(&self, weighting: &str) -> PyResult<(PyMatrix, usize)> {
        let (m, zeros) = self.inner.document_term_matrix(parse(weighting)?).map_err(err)?;
        Ok((
            PyMatrix {
                inner: m,
                vocab: Some(self.inner.vocabulary.clone()),
            },
            zeros,
        ))
    }
}

/// Sparse document-term matrix, optionally carrying its vocabulary.
#[pyclass(name = "Matrix", module = "pyhexsom", skip_from_py_object)]
#[derive(Clone)]
struct PyMatrix {
    inner: DocTermMatrix,
    vocab: Option<Vocabulary>,
}

#[pymethods]
impl PyMatrix {
    /// Rows are stored as given; no normalization is applied.
    #[staticmethod]
    #[pyo3(signature = (rows, weighting="tf"))]
    fn from_dense(rows: Vec<Vec<f64>>, weighting: &str) -> PyResult<Self> {
        let inner = DocTermMatrix::from_dense(&rows, parse(weighting)?).map_err(err)?;
        Ok(Self { inner, vocab: None })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let f = File::open(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        let d = read_dtm(BufReader::new(f)).map_err(err)?;
        Ok(Self {
            inner: d.matrix,
            vocab: Some(d.vocabulary),
        })
    }

    /// Writes a DTM1 file; requires a vocabulary.
    fn save(&self, path: &str) -> PyResult<()> {
        let vocab = self
            .vocab
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("matrix has no vocabulary"))?;
        let f = File::create(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
        write_dtm(BufWriter::new(f), &self.inner, vocab).map_err(err)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.n_rows(), self.inner.n_cols())
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    #[getter]
    fn weighting(&self) -> &'static str {
        match self.inner.weighting() {
            Weighting::Tf => "tf",
            Weighting::Tfidf => "tfidf",
        }
    }

    #[getter]
    fn vocabulary(&self) -> Option<Vec<String>> {
        self.vocab.as_ref().map(|v| v.terms().to_vec())
    }

    fn nonzero_rows(&self) -> Vec<usize> {
        self.inner.nonzero_rows()
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        self.inner.to_dense()
    }
}

#[pyclass(name = "Geometry", module = "pyhexsom", skip_from_py_object)]
#[derive(Clone)]
struct PyGeometry {
    #[pyo3(get)]
    m: usize,
    #[pyo3(get)]
    munits: usize,
    #[pyo3(get)]
    pc1: f64,
    #[pyo3(get)]
    pc2: f64,
    #[pyo3(get)]
    nrows: usize,
    #[pyo3(get)]
    ncols: usize,
    #[pyo3(get)]
    num_iterations: u64,
    #[pyo3(get)]
    mpd: f64,
    inner: MapGeometry,
}

impl From<MapGeometry> for PyGeometry {
    fn from(g: MapGeometry) -> Self {
        Self {
            m: g.m,
            munits: g.munits,
            pc1: g.pc1,
            pc2: g.pc2,
            nrows: g.nrows,
            ncols: g.ncols,
            num_iterations: g.num_iterations,
            mpd: g.mpd,
            inner: g,
        }
    }
}

#[pymethods]
impl PyGeometry {
    fn with_override(&self, nrows: usize, ncols: usize, num_iterations: u64) -> PyResult<Self> {
        Ok(self.inner.clone().with_override(nrows, ncols, num_iterations).map_err(err)?.into())
    }

    fn __repr__(&self) -> String {
        format!(
            "Geometry(nrows={}, ncols={}, num_iterations={}, m={})",
            self.nrows, self.ncols, self.num_iterations, self.m
        )
    }
}

/// Sizes a map from the matrix's nonzero rows.
#[pyfunction]
fn map_geometry(data: &PyMatrix) -> PyResult<PyGeometry> {
    let m = data.inner.nonzero_rows().len();
    Ok(som::map_geometry(m, &data.inner).map_err(err)?.into())
}

#[pyclass(name = "TrainedMap", module = "pyhexsom")]
struct PyTrainedMap {
    inner: som::TrainedMap,
}

#[pymethods]
impl PyTrainedMap {
    #[staticmethod]
    fn decode(bytes: &[u8]) -> PyResult<Self> {
        Ok(Self {
            inner: som::decode(bytes).map_err(err)?,
        })
    }

    /// SOM1 bytes; identical across engines that produce identical maps.
    fn encode(&self) -> Vec<u8> {
        som::encode(&self.inner)
    }

    #[getter]
    fn geometry(&self) -> PyGeometry {
        self.inner.geometry.clone().into()
    }

    #[getter]
    fn quantization_error(&self) -> f64 {
        self.inner.quantization_error
    }

    #[getter]
    fn engine(&self) -> String {
        self.inner.engine.to_string()
    }

    #[getter]
    fn wall_seconds(&self) -> f64 {
        self.inner.wall_seconds
    }

    /// Prototype vectors in flat (row-major) unit order.
    fn codebook(&self) -> Vec<Vec<f64>> {
        let cb = &self.inner.codebook;
        (0..cb.n_units()).map(|u| cb.unit(u).to_vec()).collect()
    }

    /// (unit, distance) per training document.
    #[getter]
    fn assignments(&self) -> Vec<(usize, f64)> {
        self.inner.assignments.iter().map(|b| (b.index, b.distance)).collect()
    }

    fn assign(&self, data: &PyMatrix) -> PyResult<Vec<(usize, f64)>> {
        let bmus = som::assign(&data.inner, &self.inner.codebook).map_err(err)?;
        Ok(bmus.iter().map(|b| (b.index, b.distance)).collect())
    }

    fn quantization_error_of(&self, data: &PyMatrix) -> PyResult<f64> {
        som::quantization_error(&data.inner, &self.inner.codebook).map_err(err)
    }

    fn similarity_colors(&self) -> Vec<(u8, u8, u8)> {
        viz::similarity_colors(&self.inner.codebook)
            .into_iter()
            .map(|[r, g, b]| (r, g, b))
            .collect()
    }

    /// Per-unit decorations as a JSON array.
    #[pyo3(signature = (data, severities=None, top_k=5))]
    fn decorations(&self, data: &PyMatrix, severities: Option<Vec<Option<u8>>>, top_k: usize) -> PyResult<String> {
        Ok(viz::decorations_json(&self.decorate(data, severities, top_k)?))
    }

    #[pyo3(signature = (data, severities=None, top_k=5, cell_size=40.0, show_counts=false, title=None))]
    fn render_svg(
        &self,
        data: &PyMatrix,
        severities: Option<Vec<Option<u8>>>,
        top_k: usize,
        cell_size: f64,
        show_counts: bool,
        title: Option<String>,
    ) -> PyResult<String> {
        let decorations = self.decorate(data, severities, top_k)?;
        let opts = SvgOptions {
            cell_size,
            show_counts,
            title,
            ..SvgOptions::default()
        };
        viz::render_svg(&self.inner.geometry, &decorations, &opts).map_err(err)
    }
}

impl PyTrainedMap {
    fn decorate(
        &self,
        data: &PyMatrix,
        severities: Option<Vec<Option<u8>>>,
        top_k: usize,
    ) -> PyResult<Vec<viz::NodeDecoration>> {
        let assignments = som::assign(&data.inner, &self.inner.codebook).map_err(err)?;
        let severities = match severities {
            Some(s) => s.into_iter().map(severity).collect::<PyResult<Vec<_>>>()?,
            None => vec![None; assignments.len()],
        };
        viz::decorate(&self.inner.codebook, &assignments, &severities, data.vocab.as_ref(), top_k).map_err(err)
    }
}

/// Trains a map. `engine` is serial, parallel-strict or parallel-fast.
#[pyfunction]
#[pyo3(signature = (data, geometry=None, engine="serial", workers=None, seed=0, alpha0=None, sigma0=None))]
fn train(
    py: Python<'_>,
    data: &PyMatrix,
    geometry: Option<&PyGeometry>,
    engine: &str,
    workers: Option<usize>,
    seed: u64,
    alpha0: Option<f64>,
    sigma0: Option<f64>,
) -> PyResult<PyTrainedMap> {
    let g = match geometry {
        Some(g) => g.inner.clone(),
        None => map_geometry(data)?.inner,
    };
    let mut s = TrainingSchedule::for_geometry(&g, seed);
    if let Some(a) = alpha0 {
        s.alpha0 = a;
    }
    if let Some(sg) = sigma0 {
        s.sigma0 = sg;
    }
    let engine: Engine = parse(engine)?;
    let workers = workers.unwrap_or_else(parallel::default_workers);
    let matrix = &data.inner;
    let map = py
        .detach(|| match engine {
            Engine::Serial => som::train_serial(matrix, &g, &s),
            Engine::ParallelStrict => parallel::train_parallel(matrix, &g, &s, workers, Mode::Strict),
            Engine::ParallelFast => parallel::train_parallel(matrix, &g, &s, workers, Mode::Fast),
        })
        .map_err(err)?;
    Ok(PyTrainedMap { inner: map })
}

/// Clustered synthetic corpus and its ground-truth cluster labels.
#[pyfunction]
#[pyo3(signature = (k, docs_per_cluster, dims, sparsity, seed=0))]
fn synth_corpus(k: usize, docs_per_cluster: usize, dims: usize, sparsity: f64, seed: u64) -> PyResult<(PyMatrix, Vec<usize>)> {
    let (m, labels) = bench::synth_corpus(k, docs_per_cluster, dims, sparsity, seed).map_err(err)?;
    Ok((PyMatrix { inner: m, vocab: None }, labels))
}

/// Serial, parallel-strict and parallel-fast runs from one initialization;
/// returns the CSV report.
#[pyfunction]
#[pyo3(signature = (data, dataset="data", geometry=None, workers=None, seed=0))]
fn compare_engines(
    py: Python<'_>,
    data: &PyMatrix,
    dataset: &str,
    geometry: Option<&PyGeometry>,
    workers: Option<usize>,
    seed: u64,
) -> PyResult<String> {
    let g = match geometry {
        Some(g) => g.inner.clone(),
        None => map_geometry(data)?.inner,
    };
    let s = TrainingSchedule::for_geometry(&g, seed);
    let workers = workers.unwrap_or_else(parallel::default_workers);
    let matrix = &data.inner;
    let report = py
        .detach(|| bench::compare_engines(matrix, dataset, &g, &s, workers))
        .map_err(err)?;
    report.check_parity().map_err(err)?;
    Ok(report.to_csv())
}

/// Map-size scaling study on random dense data; returns the CSV report.
#[pyfunction]
#[pyo3(signature = (sides, dim=64, samples=1000, iterations=10_000, workers=None, seed=0, repeats=3))]
fn scaling_study(
    py: Python<'_>,
    sides: Vec<usize>,
    dim: usize,
    samples: usize,
    iterations: u64,
    workers: Option<usize>,
    seed: u64,
    repeats: usize,
) -> PyResult<String> {
    let cfg = ScalingConfig {
        sides,
        dim,
        m: samples,
        iterations,
        workers: workers.unwrap_or_else(parallel::default_workers),
        seed,
        repeats,
        ..ScalingConfig::default()
    };
    let report = py.detach(|| bench::scaling_study(&cfg)).map_err(err)?;
    Ok(report.to_csv())
}

#[pymodule]
fn pyhexsom(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HexsomError", m.py().get_type::<HexsomError>())?;
    m.add_class::<PyCorpus>()?;
    m.add_class::<PyMatrix>()?;
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyTrainedMap>()?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(map_geometry, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(synth_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(compare_engines, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_study, m)?)?;
    Ok(())
}
