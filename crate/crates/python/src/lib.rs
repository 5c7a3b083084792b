//! Python bindings: `import findtrack`.

use std::path::PathBuf;

use findtrack_core::backends::open_backend;
use findtrack_core::cli::run_pipeline;
use findtrack_core::identify as ident;
use findtrack_core::io;
use findtrack_core::metrics;
use findtrack_core::synthgen;
use findtrack_core::{BinaryMask, MaskSequence, PipelineConfig, RleMask, VideoSequence};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

fn err(e: findtrack_core::Error) -> PyErr {
    if e.is_backend() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Frame", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyFrame(findtrack_core::Frame);

#[pymethods]
impl PyFrame {
    #[new]
    fn new(index: usize, width: usize, height: usize, pixels: &[u8]) -> PyResult<Self> {
        findtrack_core::Frame::new(index, width, height, pixels.to_vec())
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn index(&self) -> usize {
        self.0.index()
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn pixels<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.0.pixels())
    }

    fn rgb(&self, x: usize, y: usize) -> PyResult<(u8, u8, u8)> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(PyValueError::new_err("pixel out of range"));
        }
        let [r, g, b] = self.0.rgb(x, y);
        Ok((r, g, b))
    }

    fn __repr__(&self) -> String {
        format!(
            "Frame(index={}, {}x{})",
            self.0.index(),
            self.0.width(),
            self.0.height()
        )
    }
}

#[pyclass(name = "Mask", frozen, eq, from_py_object)]
#[derive(Clone, PartialEq)]
pub struct PyMask(BinaryMask);

#[pymethods]
impl PyMask {
    #[new]
    fn new(width: usize, height: usize, bits: Vec<bool>) -> PyResult<Self> {
        BinaryMask::from_bits(width, height, bits)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn empty(width: usize, height: usize) -> Self {
        Self(BinaryMask::empty(width, height))
    }

    /// Parses `{"size":[H,W],"counts":[...]}`.
    #[staticmethod]
    fn from_rle(text: &str) -> PyResult<Self> {
        let rle: RleMask = serde_json::from_str(text).map_err(json_err)?;
        rle.decode().map(Self).map_err(err)
    }

    fn to_rle(&self) -> PyResult<String> {
        serde_json::to_string(&self.0.to_rle()).map_err(json_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn bits(&self) -> Vec<bool> {
        self.0.bits().to_vec()
    }

    fn get(&self, x: usize, y: usize) -> PyResult<bool> {
        if x >= self.0.width() || y >= self.0.height() {
            return Err(PyValueError::new_err("pixel out of range"));
        }
        Ok(self.0.get(x, y))
    }

    fn count(&self) -> usize {
        self.0.count()
    }

    fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn __repr__(&self) -> String {
        format!(
            "Mask({}x{}, count={})",
            self.0.width(),
            self.0.height(),
            self.0.count()
        )
    }
}

#[pyclass(name = "Video", frozen, from_py_object)]
#[derive(Clone)]
pub struct PyVideo(VideoSequence);

#[pymethods]
impl PyVideo {
    #[new]
    fn new(frames: Vec<PyFrame>, expression: &str) -> PyResult<Self> {
        VideoSequence::new(frames.into_iter().map(|f| f.0).collect(), expression)
            .map(Self)
            .map_err(err)
    }

    /// Reads `%05d.ppm` frames from a directory.
    #[staticmethod]
    fn read(dir: PathBuf, expression: &str) -> PyResult<Self> {
        io::read_frame_dir(&dir, expression).map(Self).map_err(err)
    }

    fn write(&self, dir: PathBuf) -> PyResult<()> {
        io::write_frame_dir(&self.0, &dir).map_err(err)
    }

    #[getter]
    fn expression(&self) -> &str {
        self.0.expression()
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    /// 1-based, like frame indices everywhere else.
    fn frame(&self, index: usize) -> PyResult<PyFrame> {
        self.0
            .frame(index)
            .cloned()
            .map(PyFrame)
            .ok_or_else(|| PyValueError::new_err(format!("no frame {index}")))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "Config", get_all, set_all, from_py_object)]
#[derive(Clone)]
pub struct PyConfig {
    num_candidates: usize,
    w1: f64,
    w2: f64,
    memory_interval: usize,
    long_term: bool,
    backend: String,
}

impl PyConfig {
    fn core(&self) -> PipelineConfig {
        PipelineConfig {
            num_candidates: self.num_candidates,
            w1: self.w1,
            w2: self.w2,
            memory_interval: self.memory_interval,
            long_term_enabled: self.long_term,
            backend: self.backend.clone(),
        }
    }
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (num_candidates=5, w1=0.5, w2=0.5, memory_interval=3, long_term=false, backend="builtin:color".to_string()))]
    fn new(
        num_candidates: usize,
        w1: f64,
        w2: f64,
        memory_interval: usize,
        long_term: bool,
        backend: String,
    ) -> PyResult<Self> {
        let c = Self {
            num_candidates,
            w1,
            w2,
            memory_interval,
            long_term,
            backend,
        };
        c.core().validate().map_err(err)?;
        Ok(c)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.core()).map_err(json_err)
    }
}

fn config_or_default(config: Option<PyConfig>) -> PipelineConfig {
    config.map(|c| c.core()).unwrap_or_default()
}

fn masks_out(seq: MaskSequence) -> Vec<PyMask> {
    seq.into_masks().into_iter().map(PyMask).collect()
}

fn masks_in(masks: Vec<PyMask>) -> PyResult<MaskSequence> {
    MaskSequence::new(masks.into_iter().map(|m| m.0).collect()).map_err(err)
}

#[pyclass(name = "Scene", frozen)]
pub struct PyScene(synthgen::GeneratedScene);

#[pymethods]
impl PyScene {
    #[getter]
    fn video(&self) -> PyVideo {
        PyVideo(self.0.video.clone())
    }

    #[getter]
    fn gt(&self) -> Vec<PyMask> {
        masks_out(self.0.gt.clone())
    }

    #[getter]
    fn visibility(&self) -> Vec<f64> {
        self.0.visibility.clone()
    }

    #[getter]
    fn entry_frame(&self) -> usize {
        self.0.spec.target().entry_frame
    }

    #[pyo3(signature = (dir, scenario=None))]
    fn write(&self, dir: PathBuf, scenario: Option<&str>) -> PyResult<()> {
        self.0.write(&dir, scenario).map_err(err)
    }
}

#[pyfunction]
fn sample_candidates(num_frames: usize, n: usize) -> Vec<usize> {
    ident::sample_candidates(num_frames, n)
}

#[pyfunction]
fn mask_score(confidence: f64, alignment: f64, w1: f64, w2: f64) -> f64 {
    ident::mask_score(confidence, alignment, w1, w2)
}

#[pyfunction]
fn scenarios() -> Vec<&'static str> {
    synthgen::SCENARIOS.to_vec()
}

#[pyfunction]
fn scenario(name: &str, seed: u64) -> PyResult<PyScene> {
    let spec = synthgen::scenario(name, seed).map_err(err)?;
    synthgen::generate(&spec).map(PyScene).map_err(err)
}

/// Returns `(key_frame, key_mask, report_json)`.
#[pyfunction]
#[pyo3(signature = (video, config=None))]
fn identify(video: &PyVideo, config: Option<PyConfig>) -> PyResult<(usize, PyMask, String)> {
    let config = config_or_default(config);
    let backend = open_backend(&config.backend).map_err(err)?;
    let r = ident::identify_target(&video.0, &config, backend.as_ref(), backend.as_ref())
        .map_err(err)?;
    let report = serde_json::to_string(&r.report()).map_err(json_err)?;
    Ok((r.key_frame, PyMask(r.key_mask), report))
}

#[pyfunction]
#[pyo3(signature = (video, key_frame, key_mask, config=None))]
fn propagate(
    video: &PyVideo,
    key_frame: usize,
    key_mask: &PyMask,
    config: Option<PyConfig>,
) -> PyResult<Vec<PyMask>> {
    let config = config_or_default(config);
    findtrack_core::propagate(&video.0, key_frame, &key_mask.0, &config)
        .map(masks_out)
        .map_err(err)
}

/// Identification plus propagation. Returns `(masks, manifest_json)`.
#[pyfunction]
#[pyo3(signature = (video, config=None))]
fn run(video: &PyVideo, config: Option<PyConfig>) -> PyResult<(Vec<PyMask>, String)> {
    let config = config_or_default(config);
    let backend = open_backend(&config.backend).map_err(err)?;
    let out = run_pipeline(&video.0, &config, backend.as_ref()).map_err(err)?;
    let manifest = serde_json::to_string(&out.manifest).map_err(json_err)?;
    Ok((masks_out(out.masks), manifest))
}

#[pyfunction]
fn region_j(pred: &PyMask, gt: &PyMask) -> PyResult<f64> {
    metrics::region_j(&pred.0, &gt.0).map_err(err)
}

#[pyfunction]
fn contour_f(pred: &PyMask, gt: &PyMask) -> PyResult<f64> {
    metrics::contour_f(&pred.0, &gt.0).map_err(err)
}

/// Returns `(J, F, JF)` averaged over frames.
#[pyfunction]
fn evaluate(pred: Vec<PyMask>, gt: Vec<PyMask>) -> PyResult<(f64, f64, f64)> {
    let s = findtrack_core::evaluate_sequence(&masks_in(pred)?, &masks_in(gt)?).map_err(err)?;
    Ok((s.j, s.f, s.jf))
}

#[pyfunction]
fn read_masks(dir: PathBuf) -> PyResult<Vec<PyMask>> {
    io::read_mask_dir(&dir).map(masks_out).map_err(err)
}

#[pyfunction]
fn write_masks(masks: Vec<PyMask>, dir: PathBuf) -> PyResult<()> {
    io::write_mask_dir(&masks_in(masks)?, &dir).map_err(err)
}

#[pymodule]
fn findtrack(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrame>()?;
    m.add_class::<PyMask>()?;
    m.add_class::<PyVideo>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyScene>()?;
    m.add_function(wrap_pyfunction!(sample_candidates, m)?)?;
    m.add_function(wrap_pyfunction!(mask_score, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(scenario, m)?)?;
    m.add_function(wrap_pyfunction!(identify, m)?)?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(region_j, m)?)?;
    m.add_function(wrap_pyfunction!(contour_f, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(read_masks, m)?)?;
    m.add_function(wrap_pyfunction!(write_masks, m)?)?;
    Ok(())
}
