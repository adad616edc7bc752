//! Python bindings for `gmsd-core`.
//!
//! ```python
//! import pygmsd
//! ref = pygmsd.LuminanceImage.load("ref.png")
//! dist = pygmsd.LuminanceImage.load("dist.png")
//! print(pygmsd.gmsd(ref, dist))
//! ```

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use gmsd_core::eval::{self, EvalSummary, GroupBy, LogisticForm, LogisticParams};
use gmsd_core::gmsd::{self as kernel, Metric, MetricConfig};
use gmsd_core::image::{self, DistortionKind, DistortionSpec};
use gmsd_core::Error;

fn to_py(err: Error) -> PyErr {
    if err.is_io() {
        PyOSError::new_err(err.to_string())
    } else {
        PyValueError::new_err(err.to_string())
    }
}

fn config(c: f64, downsample: bool) -> MetricConfig {
    MetricConfig {
        c,
        downsample,
        ..MetricConfig::default()
    }
}

fn parse_form(name: &str) -> PyResult<LogisticForm> {
    match name {
        "standard" => Ok(LogisticForm::Standard),
        "literal" => Ok(LogisticForm::Literal),
        _ => Err(PyValueError::new_err(format!(
            "unknown logistic form {name:?}"
        ))),
    }
}

/// A luminance plane with samples in `[0, dynamic_range]`.
#[pyclass(
    name = "LuminanceImage",
    module = "pygmsd",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
pub struct PyImage {
    inner: image::LuminanceImage,
}

#[pymethods]
impl PyImage {
    #[new]
    #[pyo3(signature = (width, height, samples, dynamic_range = 1.0))]
    fn new(width: usize, height: usize, samples: Vec<f64>, dynamic_range: f64) -> PyResult<Self> {
        image::LuminanceImage::with_range(width, height, samples, dynamic_range)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Reads a P5/P6 PNM or 8-bit PNG file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        image::load_image(path)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn constant(width: usize, height: usize, value: f64) -> PyResult<Self> {
        image::LuminanceImage::constant(width, height, value)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn random(width: usize, height: usize, seed: u64) -> PyResult<Self> {
        image::random_image(width, height, seed)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn textured(width: usize, height: usize, seed: u64) -> PyResult<Self> {
        image::textured_image(width, height, seed)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Writes the image as an 8-bit binary PGM.
    fn save(&self, path: &str) -> PyResult<()> {
        image::save_gray(&self.inner, path).map_err(to_py)
    }

    /// `kind` is one of "awn", "blur", "contrast".
    #[pyo3(signature = (kind, level, seed = 0))]
    fn distort(&self, kind: &str, level: f64, seed: u64) -> PyResult<Self> {
        let kind = match kind {
            "awn" => DistortionKind::Awn,
            "blur" => DistortionKind::GaussianBlur,
            "contrast" => DistortionKind::ContrastScale,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown distortion {other:?}"
                )))
            }
        };
        let spec = DistortionSpec::new(kind, level, seed).map_err(to_py)?;
        image::apply_distortion(&self.inner, &spec)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn dynamic_range(&self) -> f64 {
        self.inner.dynamic_range()
    }

    /// Row-major samples as a flat list.
    fn samples(&self) -> Vec<f64> {
        self.inner.samples().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "LuminanceImage({}x{}, dynamic_range={})",
            self.inner.width(),
            self.inner.height(),
            self.inner.dynamic_range()
        )
    }
}

#[pyclass(name = "QualityResult", module = "pygmsd", frozen, get_all)]
pub struct PyQualityResult {
    gmsd: f64,
    gmsm: f64,
    /// The GMS map as an image, when requested.
    map: Option<PyImage>,
}

#[pymethods]
impl PyQualityResult {
    fn __repr__(&self) -> String {
        format!("QualityResult(gmsd={}, gmsm={})", self.gmsd, self.gmsm)
    }
}

#[pyfunction]
#[pyo3(signature = (reference, distorted, c = kernel::DEFAULT_C, downsample = true, retain_map = false))]
fn gmsd_index(
    reference: &PyImage,
    distorted: &PyImage,
    c: f64,
    downsample: bool,
    retain_map: bool,
) -> PyResult<PyQualityResult> {
    let cfg = MetricConfig {
        retain_map,
        ..config(c, downsample)
    };
    let r = kernel::gmsd_index(&reference.inner, &distorted.inner, &cfg).map_err(to_py)?;
    Ok(PyQualityResult {
        gmsd: r.gmsd,
        gmsm: r.gmsm,
        map: r.map.map(|m| PyImage {
            inner: m.to_image(),
        }),
    })
}

fn score(metric: Metric, r: &PyImage, d: &PyImage, c: f64, downsample: bool) -> PyResult<f64> {
    metric
        .score(&r.inner, &d.inner, &config(c, downsample))
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (reference, distorted, c = kernel::DEFAULT_C, downsample = true))]
fn gmsd(reference: &PyImage, distorted: &PyImage, c: f64, downsample: bool) -> PyResult<f64> {
    score(Metric::Gmsd, reference, distorted, c, downsample)
}

#[pyfunction]
#[pyo3(signature = (reference, distorted, c = kernel::DEFAULT_C, downsample = true))]
fn gmsm(reference: &PyImage, distorted: &PyImage, c: f64, downsample: bool) -> PyResult<f64> {
    score(Metric::Gmsm, reference, distorted, c, downsample)
}

/// PSNR in dB; `inf` for identical images.
#[pyfunction]
fn psnr(reference: &PyImage, distorted: &PyImage) -> PyResult<f64> {
    kernel::psnr(&reference.inner, &distorted.inner)
        .map(|p| p.as_f64())
        .map_err(to_py)
}

#[pyfunction]
fn mse_sd(reference: &PyImage, distorted: &PyImage) -> PyResult<f64> {
    kernel::mse_sd_index(&reference.inner, &distorted.inner).map_err(to_py)
}

#[pyfunction]
fn spearman(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    eval::spearman(&a, &b).map_err(to_py)
}

#[pyfunction]
fn pearson(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    eval::pearson(&a, &b).map_err(to_py)
}

#[pyfunction]
fn rmse(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    eval::rmse(&a, &b).map_err(to_py)
}

/// Returns the five fitted parameters.
#[pyfunction]
#[pyo3(signature = (q, s, form = "standard"))]
fn logistic_fit(q: Vec<f64>, s: Vec<f64>, form: &str) -> PyResult<[f64; 5]> {
    eval::logistic_fit(&q, &s, parse_form(form)?)
        .map(|f| f.params.beta)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (q, beta, form = "standard"))]
fn logistic_apply(q: Vec<f64>, beta: [f64; 5], form: &str) -> PyResult<Vec<f64>> {
    Ok(eval::logistic_apply(
        &q,
        &LogisticParams { beta },
        parse_form(form)?,
    ))
}

/// Returns `(h, statistic, critical_value)`; `h == 1` when `a` is
/// significantly better than `b`.
#[pyfunction]
#[pyo3(signature = (residuals_a, residuals_b, alpha = 0.05))]
fn f_test_better(
    residuals_a: Vec<f64>,
    residuals_b: Vec<f64>,
    alpha: f64,
) -> PyResult<(u8, f64, f64)> {
    eval::f_test_better(&residuals_a, &residuals_b, alpha)
        .map(|o| (o.h(), o.statistic, o.critical_value))
        .map_err(to_py)
}

/// `entries` holds `(srocc, plcc, weight)` triples.
#[pyfunction]
fn weighted_average(entries: Vec<(f64, f64, f64)>) -> PyResult<(f64, f64)> {
    let entries: Vec<(EvalSummary, f64)> = entries
        .into_iter()
        .map(|(srocc, plcc, w)| {
            (
                EvalSummary {
                    srocc,
                    plcc,
                    rmse: f64::NAN,
                    params: LogisticParams::linear(1.0, 0.0),
                    n: 0,
                },
                w,
            )
        })
        .collect();
    eval::weighted_average(&entries).map_err(to_py)
}

/// Evaluates a metric over a manifest CSV. Returns one tuple
/// `(group, n, srocc, plcc, rmse, beta)` per group.
#[pyfunction]
#[pyo3(signature = (manifest, metric = "gmsd", group_by = "none", logistic = "standard", c = kernel::DEFAULT_C, downsample = true))]
#[allow(clippy::type_complexity)]
fn evaluate(
    py: Python<'_>,
    manifest: &str,
    metric: &str,
    group_by: &str,
    logistic: &str,
    c: f64,
    downsample: bool,
) -> PyResult<Vec<(String, usize, f64, f64, f64, [f64; 5])>> {
    let metric: Metric = metric.parse().map_err(to_py)?;
    let group_by = match group_by {
        "none" => GroupBy::None,
        "distortion" => GroupBy::DistortionType,
        "dataset" => GroupBy::DatasetId,
        other => return Err(PyValueError::new_err(format!("unknown grouping {other:?}"))),
    };
    let form = parse_form(logistic)?;
    let records = eval::read_manifest(manifest).map_err(to_py)?;
    let cfg = config(c, downsample);
    let groups = py
        .detach(|| eval::evaluate(&records, metric, &cfg, group_by, form))
        .map_err(to_py)?;
    Ok(groups
        .into_iter()
        .map(|g| {
            let s = g.summary;
            (g.group, s.n, s.srocc, s.plcc, s.rmse, s.params.beta)
        })
        .collect())
}

/// SROCC of GMSD for each stability constant, as `(c, srocc)` pairs.
#[pyfunction]
#[pyo3(signature = (manifest, c_values, downsample = true))]
fn sweep_c(
    py: Python<'_>,
    manifest: &str,
    c_values: Vec<f64>,
    downsample: bool,
) -> PyResult<Vec<(f64, f64)>> {
    let records = eval::read_manifest(manifest).map_err(to_py)?;
    let cfg = config(kernel::DEFAULT_C, downsample);
    let points = py
        .detach(|| eval::sweep_c(&records, &c_values, &cfg))
        .map_err(to_py)?;
    Ok(points.into_iter().map(|p| (p.c, p.srocc)).collect())
}

#[pymodule]
fn pygmsd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DEFAULT_C", kernel::DEFAULT_C)?;
    m.add_class::<PyImage>()?;
    m.add_class::<PyQualityResult>()?;
    m.add_function(wrap_pyfunction!(gmsd_index, m)?)?;
    m.add_function(wrap_pyfunction!(gmsd, m)?)?;
    m.add_function(wrap_pyfunction!(gmsm, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(mse_sd, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add_function(wrap_pyfunction!(logistic_fit, m)?)?;
    m.add_function(wrap_pyfunction!(logistic_apply, m)?)?;
    m.add_function(wrap_pyfunction!(f_test_better, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_average, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_c, m)?)?;
    Ok(())
}
