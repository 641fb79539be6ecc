//! Python bindings: `import shapefit_py`.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use shapefit::analyze::{entropy_group_analysis, level_summary};
use shapefit::dataset::{build_dataset, DatasetConfig, DatasetManifest, SplitSpec};
use shapefit::raster::shannon_entropy;
use shapefit::{Bounds, RandomStream, ShapeKind};

create_exception!(shapefit_py, ShapefitError, PyException);

fn err(e: shapefit::Error) -> PyErr {
    ShapefitError::new_err(e.to_string())
}

fn mode(index: u8) -> PyResult<shapefit::Mode> {
    shapefit::Mode::from_index(index).ok_or_else(|| PyValueError::new_err(format!("mode must be 0 or 1, got {index}")))
}

/// RGB image, 8 bits per channel.
#[pyclass(module = "shapefit_py", skip_from_py_object, frozen)]
#[derive(Clone)]
pub struct Image(shapefit::RasterImage);

#[pymethods]
impl Image {
    /// Row-major RGB bytes, `3 * width * height` long.
    #[new]
    fn new(width: u32, height: u32, data: Vec<u8>) -> PyResult<Self> {
        shapefit::RasterImage::from_rgb(width, height, data).map(Self).map_err(err)
    }

    #[staticmethod]
    fn open(path: PathBuf) -> PyResult<Self> {
        shapefit::RasterImage::open(path).map(Self).map_err(err)
    }

    /// Decodes PNG, JPEG, ... bytes.
    #[staticmethod]
    fn decode(data: &[u8]) -> PyResult<Self> {
        shapefit::RasterImage::decode(data).map(Self).map_err(err)
    }

    #[getter]
    fn width(&self) -> u32 {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> u32 {
        self.0.height()
    }

    fn pixel(&self, x: u32, y: u32) -> PyResult<(u8, u8, u8)> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(PyValueError::new_err(format!("pixel ({x}, {y}) outside the image")));
        }
        let [r, g, b] = self.0.pixel(x, y);
        Ok((r, g, b))
    }

    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.0.as_bytes())
    }

    fn to_png<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyBytes>> {
        Ok(PyBytes::new(py, &self.0.to_png().map_err(err)?))
    }

    fn save_png(&self, path: PathBuf) -> PyResult<()> {
        self.0.save_png(path).map_err(err)
    }

    /// Shannon entropy of the grayscale histogram, in bits.
    fn entropy(&self) -> f64 {
        shannon_entropy(&self.0).bits()
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.0.width(), self.0.height())
    }
}

/// One primitive in integer pixel-center coordinates.
#[pyclass(module = "shapefit_py", skip_from_py_object, frozen, eq)]
#[derive(Clone, PartialEq)]
pub struct Shape(shapefit::Shape);

#[pymethods]
impl Shape {
    /// `{"kind": "circle", "cx": 3, "cy": 4, "r": 2}` and so on.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("shapes serialize")
    }

    #[staticmethod]
    fn random(kind: &str, width: u32, height: u32, seed: u64) -> PyResult<Self> {
        let kind: ShapeKind = kind.parse().map_err(PyValueError::new_err)?;
        Ok(Self(shapefit::Shape::random(kind, Bounds::new(width, height), &mut RandomStream::new(seed))))
    }

    fn mutate(&self, width: u32, height: u32, seed: u64) -> Self {
        Self(self.0.mutate(Bounds::new(width, height), &mut RandomStream::new(seed)))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    /// Covered pixels as `(y, x_first, x_last)` runs, clipped to the canvas.
    fn spans(&self, width: u32, height: u32) -> Vec<(u32, u32, u32)> {
        self.0.rasterize(Bounds::new(width, height)).iter().map(|s| (s.y, s.x1, s.x2)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Shape({})", self.to_json())
    }
}

/// Background plus ordered shapes, at working and original resolution.
#[pyclass(module = "shapefit_py", skip_from_py_object, frozen)]
#[derive(Clone)]
pub struct Document(shapefit::ShapeListDocument);

#[pymethods]
impl Document {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        shapefit::ShapeListDocument::from_json(text).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_svg(text: &str) -> PyResult<Self> {
        shapefit::parse_svg(text).map(Self).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn to_svg(&self) -> String {
        shapefit::emit_svg(&self.0).as_str().to_string()
    }

    fn to_minified_svg(&self) -> PyResult<String> {
        Ok(shapefit::minify_svg(&shapefit::emit_svg(&self.0)).map_err(err)?.as_str().to_string())
    }

    /// `scale` is "original" or "working".
    #[pyo3(signature = (scale = "original"))]
    fn render(&self, scale: &str) -> PyResult<Image> {
        let scale = match scale {
            "original" => shapefit::RenderScale::Original,
            "working" => shapefit::RenderScale::Working,
            other => return Err(PyValueError::new_err(format!("scale must be 'original' or 'working', got '{other}'"))),
        };
        Ok(Image(shapefit::render(&self.0, scale)))
    }

    /// Byte sizes as JSON: svg_bytes, minified_bytes, png_bytes, per_kind_mean_element_bytes.
    fn size_report(&self) -> PyResult<String> {
        let report = shapefit::size_report(&self.0).map_err(err)?;
        Ok(serde_json::to_string(&report).expect("report serializes"))
    }

    /// The first `n` shapes.
    fn prefix(&self, n: usize) -> Self {
        Self(self.0.prefix(n))
    }

    fn shape(&self, index: usize) -> PyResult<(Shape, (u8, u8, u8, u8))> {
        let p = self.0.shapes.get(index).ok_or_else(|| PyValueError::new_err(format!("no shape {index}")))?;
        Ok((Shape(p.shape), (p.color.r, p.color.g, p.color.b, p.color.a)))
    }

    #[getter]
    fn size(&self) -> (u32, u32) {
        (self.0.w, self.0.h)
    }

    fn __len__(&self) -> usize {
        self.0.shapes.len()
    }

    fn __repr__(&self) -> String {
        format!("Document({}x{}, {} shapes)", self.0.w, self.0.h, self.0.shapes.len())
    }
}

/// Search settings. Unset arguments keep the library defaults.
#[pyclass(module = "shapefit_py", skip_from_py_object, get_all, set_all)]
#[derive(Clone)]
pub struct FitConfig {
    mode: u8,
    levels: Vec<usize>,
    alpha: u8,
    probes: usize,
    climbers: usize,
    max_age: usize,
    working_size: u32,
    seed: u64,
    workers: usize,
    retries: usize,
}

impl FitConfig {
    fn to_core(&self) -> PyResult<shapefit::FitConfig> {
        let c = shapefit::FitConfig {
            mode: mode(self.mode)?,
            checkpoints: self.levels.clone(),
            alpha: self.alpha,
            probes: self.probes,
            climbers: self.climbers,
            max_age: self.max_age,
            working_size: self.working_size,
            seed: self.seed,
            workers: self.workers,
            retries: self.retries,
        };
        c.validate().map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(c)
    }
}

impl From<&shapefit::FitConfig> for FitConfig {
    fn from(c: &shapefit::FitConfig) -> Self {
        Self {
            mode: c.mode.index(),
            levels: c.checkpoints.clone(),
            alpha: c.alpha,
            probes: c.probes,
            climbers: c.climbers,
            max_age: c.max_age,
            working_size: c.working_size,
            seed: c.seed,
            workers: c.workers,
            retries: c.retries,
        }
    }
}

#[pymethods]
impl FitConfig {
    #[new]
    #[pyo3(signature = (*, mode=None, levels=None, alpha=None, probes=None, climbers=None, max_age=None,
                        working_size=None, seed=None, workers=None, retries=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        mode: Option<u8>,
        levels: Option<Vec<usize>>,
        alpha: Option<u8>,
        probes: Option<usize>,
        climbers: Option<usize>,
        max_age: Option<usize>,
        working_size: Option<u32>,
        seed: Option<u64>,
        workers: Option<usize>,
        retries: Option<usize>,
    ) -> PyResult<Self> {
        let d = FitConfig::from(&shapefit::FitConfig::default());
        let c = Self {
            mode: mode.unwrap_or(d.mode),
            levels: levels.unwrap_or(d.levels),
            alpha: alpha.unwrap_or(d.alpha),
            probes: probes.unwrap_or(d.probes),
            climbers: climbers.unwrap_or(d.climbers),
            max_age: max_age.unwrap_or(d.max_age),
            working_size: working_size.unwrap_or(d.working_size),
            seed: seed.unwrap_or(d.seed),
            workers: workers.unwrap_or(d.workers),
            retries: retries.unwrap_or(d.retries),
        };
        c.to_core()?;
        Ok(c)
    }

    fn __repr__(&self) -> String {
        format!(
            "FitConfig(mode={}, levels={:?}, alpha={}, probes={}, climbers={}, max_age={}, working_size={}, seed={}, workers={}, retries={})",
            self.mode, self.levels, self.alpha, self.probes, self.climbers, self.max_age, self.working_size, self.seed,
            self.workers, self.retries
        )
    }
}

/// Checkpoint row: shape count, squared error, RMSE and SVG size.
#[pyclass(module = "shapefit_py", skip_from_py_object, frozen, get_all)]
#[derive(Clone)]
pub struct Checkpoint {
    level: usize,
    sse: u64,
    rmse: f64,
    svg_bytes: u64,
}

#[pyclass(module = "shapefit_py", skip_from_py_object, frozen)]
pub struct FitResult(shapefit::FitResult);

#[pymethods]
impl FitResult {
    #[getter]
    fn checkpoints(&self) -> Vec<Checkpoint> {
        self.0
            .checkpoints
            .entries
            .iter()
            .map(|c| Checkpoint { level: c.shapes, sse: c.sse, rmse: c.rmse, svg_bytes: c.svg_bytes })
            .collect()
    }

    /// RMSE after every accepted shape.
    #[getter]
    fn trajectory(&self) -> Vec<f64> {
        self.0.trajectory.iter().map(|s| s.rmse).collect()
    }

    #[getter]
    fn forced_steps(&self) -> usize {
        self.0.forced_steps()
    }

    /// Document holding the first `level` shapes; every shape when omitted.
    #[pyo3(signature = (level = None))]
    fn document(&self, level: Option<usize>) -> PyResult<Document> {
        let n = level.unwrap_or(self.0.state.placed.len());
        if n > self.0.state.placed.len() {
            return Err(PyValueError::new_err(format!("only {} shapes were placed", self.0.state.placed.len())));
        }
        Ok(Document(self.0.document_at(n)))
    }

    fn trace_jsonl(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.0.write_trace(&mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("trace is UTF-8"))
    }
}

/// Fits `image`; the interpreter lock is released while searching.
#[pyfunction]
#[pyo3(signature = (image, config = None))]
fn fit(py: Python<'_>, image: &Image, config: Option<&FitConfig>) -> PyResult<FitResult> {
    let config = match config {
        Some(c) => c.to_core()?,
        None => shapefit::FitConfig::default(),
    };
    let target = image.0.clone();
    py.detach(move || shapefit::fit(&target, &config)).map(FitResult).map_err(err)
}

/// Builds a dataset under `output` and returns the number of manifest entries.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (input, output, config = None, *, modes = vec![0, 1], split = "8:1:1", split_seed = 0, resume = false))]
fn build(
    py: Python<'_>,
    input: PathBuf,
    output: PathBuf,
    config: Option<&FitConfig>,
    modes: Vec<u8>,
    split: &str,
    split_seed: u64,
    resume: bool,
) -> PyResult<usize> {
    let mut cfg = DatasetConfig::new(input, output);
    if let Some(c) = config {
        cfg.fit = c.to_core()?;
        cfg.workers = c.workers;
    }
    cfg.modes = modes.into_iter().map(mode).collect::<PyResult<_>>()?;
    cfg.split = split.parse::<SplitSpec>().map_err(|e| PyValueError::new_err(e.to_string()))?;
    cfg.split_seed = split_seed;
    cfg.resume = resume;
    py.detach(move || build_dataset(&cfg)).map(|m| m.entries.len()).map_err(err)
}

/// Entropy-group report of a manifest as JSON.
#[pyfunction]
#[pyo3(signature = (manifest, groups = 20, sample = None, seed = 0))]
fn analyze(manifest: PathBuf, groups: usize, sample: Option<usize>, seed: u64) -> PyResult<String> {
    let m = DatasetManifest::load(&manifest).map_err(err)?;
    let sample = sample.unwrap_or(m.entries.len());
    Ok(entropy_group_analysis(&m, sample, groups, seed).map_err(err)?.to_json())
}

/// Per-level means of a manifest as JSON.
#[pyfunction]
fn summarize(manifest: PathBuf) -> PyResult<String> {
    let m = DatasetManifest::load(&manifest).map_err(err)?;
    Ok(level_summary(&m).to_json())
}

#[pymodule]
pub fn shapefit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ShapefitError", m.py().get_type::<ShapefitError>())?;
    m.add_class::<Image>()?;
    m.add_class::<Shape>()?;
    m.add_class::<Document>()?;
    m.add_class::<FitConfig>()?;
    m.add_class::<Checkpoint>()?;
    m.add_class::<FitResult>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    Ok(())
}
