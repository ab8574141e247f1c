//! Python bindings: datasets, solver entry points, and convergence traces.
//!
//! Matrices cross the boundary as plain lists (row-major lists of rows for
//! features and weights), which keeps the module dependency-free on the
//! Python side. Build with `cargo build -p piano-py --release` and expose
//! `target/release/libpiano_py.so` as `piano_py.so` on `sys.path`.

use ndarray::Array2;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use piano_core::baselines::{bohning_mm_fit, coord_mm_l1_fit, irls_fit};
use piano_core::io::{load_csv, load_libsvm, synth_generate, LabelMode, SyntheticSpec};
use piano_core::{FitConfig, Regularization, WeightMatrix};

fn to_py_err(err: piano_core::Error) -> PyErr {
    match err {
        piano_core::Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn rows_to_array(rows: &[Vec<f64>], what: &str) -> PyResult<Array2<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(PyValueError::new_err(format!("{what}: ragged rows")));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

fn weights_from_py(rows: &[Vec<f64>]) -> PyResult<WeightMatrix> {
    WeightMatrix::from_array(rows_to_array(rows, "weights")?).map_err(to_py_err)
}

fn weights_to_py(w: &WeightMatrix) -> Vec<Vec<f64>> {
    (0..w.m()).map(|i| w.row(i).to_vec()).collect()
}

/// A feature matrix with one-hot class labels.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset {
    inner: piano_core::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Builds a dataset from feature rows and per-sample class indices.
    #[staticmethod]
    #[pyo3(signature = (features, classes, class_names=None))]
    fn from_arrays(
        features: Vec<Vec<f64>>,
        classes: Vec<usize>,
        class_names: Option<Vec<String>>,
    ) -> PyResult<Self> {
        let features = rows_to_array(&features, "features")?;
        let names = class_names.unwrap_or_else(|| {
            let m = classes.iter().copied().max().map_or(0, |c| c + 1);
            (0..m).map(|i| i.to_string()).collect()
        });
        let inner = piano_core::Dataset::from_class_indices(features, &classes, names)
            .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// Seeded synthetic data with standard normal features.
    #[staticmethod]
    #[pyo3(signature = (n, d, m, seed=0, labels="model", append_bias=false))]
    fn synthetic(
        n: usize,
        d: usize,
        m: usize,
        seed: u64,
        labels: &str,
        append_bias: bool,
    ) -> PyResult<Self> {
        let label_mode = match labels {
            "model" => LabelMode::GroundTruthModel,
            "uniform" => LabelMode::UniformRandom,
            other => {
                return Err(PyValueError::new_err(format!(
                    "labels must be 'model' or 'uniform', got {other:?}"
                )))
            }
        };
        let spec = SyntheticSpec {
            n,
            d,
            m,
            label_mode,
            seed,
            append_bias,
        };
        let (inner, _) = synth_generate(&spec).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, label_col=None, has_header=false))]
    fn load_csv(path: &str, label_col: Option<usize>, has_header: bool) -> PyResult<Self> {
        let inner =
            load_csv(path.as_ref(), label_col, has_header).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load_libsvm(path: &str) -> PyResult<Self> {
        let inner = load_libsvm(path.as_ref()).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.class_names().to_vec()
    }

    fn features(&self) -> Vec<Vec<f64>> {
        (0..self.inner.n())
            .map(|j| self.inner.sample(j).to_vec())
            .collect()
    }

    fn class_indices(&self) -> Vec<usize> {
        self.inner.class_indices()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(n={}, d={}, m={})",
            self.inner.n(),
            self.inner.d(),
            self.inner.m()
        )
    }
}

/// Solver output: final weights plus the per-iteration trace.
#[pyclass(name = "FitResult", frozen)]
struct PyFitResult {
    weights: Vec<Vec<f64>>,
    trace: Vec<(usize, f64, f64, usize)>,
    converged: bool,
}

#[pymethods]
impl PyFitResult {
    /// Weight rows, one list per class.
    fn weights(&self) -> Vec<Vec<f64>> {
        self.weights.clone()
    }

    /// `(iter, objective, wall_ms, nnz)` tuples, iteration 0 included.
    fn trace(&self) -> Vec<(usize, f64, f64, usize)> {
        self.trace.clone()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.trace.last().map_or(0, |r| r.0)
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.1)
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.trace.last().map_or(0, |r| r.3)
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(objective={}, iterations={}, nnz={}, converged={})",
            self.objective(),
            self.iterations(),
            self.nnz(),
            self.converged
        )
    }
}

impl From<piano_core::FitResult> for PyFitResult {
    fn from(result: piano_core::FitResult) -> Self {
        Self {
            weights: weights_to_py(&result.weights),
            trace: result
                .trace
                .iter()
                .map(|r| (r.iter, r.objective, r.wall_ms, r.nnz))
                .collect(),
            converged: result.converged,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    reg: &str,
    lam: f64,
    beta: usize,
    tol: f64,
    max_iter: usize,
    threads: Option<usize>,
    seed: u64,
) -> PyResult<FitConfig> {
    let regularization = match reg {
        "none" => Regularization::None,
        "l1" => Regularization::L1 { lambda: lam },
        "l0" => Regularization::L0 { beta },
        other => {
            return Err(PyValueError::new_err(format!(
                "reg must be 'none', 'l1' or 'l0', got {other:?}"
            )))
        }
    };
    Ok(FitConfig {
        regularization,
        rel_tol: tol,
        max_outer_iters: max_iter,
        threads: threads.unwrap_or_else(|| {
            std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1)
        }),
        seed,
        ..FitConfig::default()
    })
}

fn starting_point(
    w0: Option<Vec<Vec<f64>>>,
    m: usize,
    d: usize,
    seed: u64,
) -> PyResult<WeightMatrix> {
    match w0 {
        Some(rows) => weights_from_py(&rows),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            Ok(WeightMatrix::random_uniform(m, d, &mut rng))
        }
    }
}

/// Element-parallel MM fit; `reg` selects the plain, l1, or l0 variant.
/// `w0=None` starts from seeded U[0,1] entries.
#[pyfunction]
#[pyo3(signature = (data, reg="none", lam=0.0, beta=0, tol=1e-3, max_iter=500, threads=None, seed=0, w0=None))]
#[allow(clippy::too_many_arguments)]
fn fit(
    py: Python<'_>,
    data: &PyDataset,
    reg: &str,
    lam: f64,
    beta: usize,
    tol: f64,
    max_iter: usize,
    threads: Option<usize>,
    seed: u64,
    w0: Option<Vec<Vec<f64>>>,
) -> PyResult<PyFitResult> {
    let config = build_config(reg, lam, beta, tol, max_iter, threads, seed)?;
    let start = starting_point(w0, data.inner.m(), data.inner.d(), seed)?;
    let result = py
        .detach(|| piano_core::fit(&data.inner, &start, &config))
        .map_err(to_py_err)?;
    Ok(result.into())
}

/// Exact-Hessian Newton baseline (unregularized only).
#[pyfunction]
#[pyo3(signature = (data, tol=1e-3, max_iter=500, seed=0, w0=None))]
fn fit_irls(
    py: Python<'_>,
    data: &PyDataset,
    tol: f64,
    max_iter: usize,
    seed: u64,
    w0: Option<Vec<Vec<f64>>>,
) -> PyResult<PyFitResult> {
    let config = build_config("none", 0.0, 0, tol, max_iter, Some(1), seed)?;
    let start = starting_point(w0, data.inner.m(), data.inner.d(), seed)?;
    let result = py
        .detach(|| irls_fit(&data.inner, &start, &config))
        .map_err(to_py_err)?;
    Ok(result.into())
}

/// Fixed-bound MM baseline (unregularized only).
#[pyfunction]
#[pyo3(signature = (data, tol=1e-3, max_iter=500, seed=0, w0=None))]
fn fit_bohning(
    py: Python<'_>,
    data: &PyDataset,
    tol: f64,
    max_iter: usize,
    seed: u64,
    w0: Option<Vec<Vec<f64>>>,
) -> PyResult<PyFitResult> {
    let config = build_config("none", 0.0, 0, tol, max_iter, Some(1), seed)?;
    let start = starting_point(w0, data.inner.m(), data.inner.d(), seed)?;
    let result = py
        .detach(|| bohning_mm_fit(&data.inner, &start, &config))
        .map_err(to_py_err)?;
    Ok(result.into())
}

/// Cyclic coordinate soft-threshold baseline for the l1 problem.
#[pyfunction]
#[pyo3(signature = (data, lam, tol=1e-3, max_iter=500, seed=0, w0=None))]
fn fit_coord_l1(
    py: Python<'_>,
    data: &PyDataset,
    lam: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
    w0: Option<Vec<Vec<f64>>>,
) -> PyResult<PyFitResult> {
    let config = build_config("l1", lam, 0, tol, max_iter, Some(1), seed)?;
    let start = starting_point(w0, data.inner.m(), data.inner.d(), seed)?;
    let result = py
        .detach(|| coord_mm_l1_fit(&data.inner, &start, &config))
        .map_err(to_py_err)?;
    Ok(result.into())
}

/// Negative log-likelihood at the given weight rows.
#[pyfunction]
fn objective(data: &PyDataset, weights: Vec<Vec<f64>>) -> PyResult<f64> {
    let w = weights_from_py(&weights)?;
    piano_core::mlr_objective(&w, &data.inner).map_err(to_py_err)
}

/// Class-major flattened gradient at the given weight rows.
#[pyfunction]
fn gradient(data: &PyDataset, weights: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let w = weights_from_py(&weights)?;
    Ok(piano_core::mlr_gradient(&w, &data.inner)
        .map_err(to_py_err)?
        .to_vec())
}

/// Softmax of a score vector.
#[pyfunction]
fn softmax(scores: Vec<f64>) -> Vec<f64> {
    piano_core::softmax_posteriors(ndarray::ArrayView1::from(&scores)).to_vec()
}

#[pymodule]
fn piano_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(fit_irls, m)?)?;
    m.add_function(wrap_pyfunction!(fit_bohning, m)?)?;
    m.add_function(wrap_pyfunction!(fit_coord_l1, m)?)?;
    m.add_function(wrap_pyfunction!(objective, m)?)?;
    m.add_function(wrap_pyfunction!(gradient, m)?)?;
    m.add_function(wrap_pyfunction!(softmax, m)?)?;
    Ok(())
}
