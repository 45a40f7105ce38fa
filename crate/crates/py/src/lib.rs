//! Python module `tmfs`: the classifier, datasets, scorers, pruning curves
//! and the clustering helpers.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tmfs_core::analysis;
use tmfs_core::data::{self, resolve_dataset, LabelColumn};
use tmfs_core::eval::{default_k_grid, evaluate_curve, EvalConfig, Protocol};
use tmfs_core::scorers::{score, Method, MethodSpec, ScorerConfig, ScoringContext};
use tmfs_core::weights::weight_views;
use tmfs_core::{BinaryDataset, Error, HyperParams, PreparedData, RawDataset, TmClassifier};

fn err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Training { .. } | Error::Csv(_) | Error::Json(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Rows = Vec<Vec<bool>>;

fn to_rows(d: &BinaryDataset) -> (Rows, Vec<usize>) {
    let bits = d.bits();
    let rows = (0..d.len())
        .map(|i| (0..d.num_columns()).map(|j| bits.get(i, j)).collect())
        .collect();
    (rows, d.labels().to_vec())
}

fn binary(x: &[Vec<bool>], y: Vec<usize>, num_classes: usize) -> PyResult<BinaryDataset> {
    BinaryDataset::from_rows(x, y, num_classes).map_err(err)
}

fn matrix(a: &ndarray::Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn raw_tuple(r: RawDataset) -> (Vec<Vec<f64>>, Vec<usize>) {
    (r.features, r.labels)
}

/// Weighted multiclass Tsetlin Machine over boolean inputs.
#[pyclass(name = "TsetlinMachine", module = "tmfs", skip_from_py_object)]
#[derive(Clone)]
struct PyTm {
    inner: TmClassifier,
}

#[pymethods]
impl PyTm {
    #[new]
    #[pyo3(signature = (num_features, num_classes, num_clauses=500, threshold=600, specificity=3.0, epochs=30, seed=42))]
    fn new(
        num_features: usize,
        num_classes: usize,
        num_clauses: usize,
        threshold: u32,
        specificity: f64,
        epochs: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let params = HyperParams::new(num_clauses, threshold, specificity, num_classes)
            .with_epochs(epochs)
            .with_seed(seed);
        Ok(Self {
            inner: TmClassifier::new(params, num_features).map_err(err)?,
        })
    }

    /// Trains for `epochs` more epochs (the configured count by default).
    #[pyo3(signature = (x, y, epochs=None))]
    fn fit(&mut self, py: Python<'_>, x: Rows, y: Vec<usize>, epochs: Option<usize>) -> PyResult<()> {
        let data = binary(&x, y, self.inner.num_classes())?;
        let epochs = epochs.unwrap_or(self.inner.params().epochs);
        py.detach(|| self.inner.fit(&data, epochs)).map_err(err)
    }

    fn predict(&self, x: Rows) -> PyResult<Vec<usize>> {
        x.iter().map(|r| self.inner.predict(r).map_err(err)).collect()
    }

    fn class_sums(&self, x: Vec<bool>) -> PyResult<Vec<i64>> {
        Ok(self.inner.class_sums(&x).map_err(err)?.0)
    }

    fn accuracy(&self, x: Rows, y: Vec<usize>) -> PyResult<f64> {
        let data = binary(&x, y, self.inner.num_classes())?;
        self.inner.accuracy(&data).map_err(err)
    }

    /// `{"w_plus", "w_minus", "net", "abs", "sum", "abs_sum"}`, each classes x columns.
    fn weight_views<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let v = weight_views(&self.inner);
        let d = PyDict::new(py);
        for (k, a) in [
            ("w_plus", &v.w_plus),
            ("w_minus", &v.w_minus),
            ("net", &v.net),
            ("abs", &v.abs),
            ("sum", &v.sum),
            ("abs_sum", &v.abs_sum),
        ] {
            d.set_item(k, matrix(a))?;
        }
        Ok(d)
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(err)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: TmClassifier::load(path).map_err(err)?,
        })
    }

    #[getter]
    fn num_features(&self) -> usize {
        self.inner.num_features()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }

    #[getter]
    fn num_clauses(&self) -> usize {
        self.inner.params().num_clauses
    }

    #[getter]
    fn epochs_trained(&self) -> usize {
        self.inner.weight_history().len()
    }

    fn __repr__(&self) -> String {
        let p = self.inner.params();
        format!(
            "TsetlinMachine(num_features={}, num_classes={}, num_clauses={}, threshold={}, specificity={})",
            self.inner.num_features(),
            p.num_classes,
            p.num_clauses,
            p.threshold,
            p.specificity
        )
    }
}

/// A dataset split 60/20/20 and thermometer-encoded on its train part.
#[pyclass(name = "Dataset", module = "tmfs")]
struct PyDataset {
    inner: PreparedData,
}

#[pymethods]
impl PyDataset {
    /// Bundled, generated, or `$TMFS_DATA_DIR/<name>.csv` dataset.
    #[staticmethod]
    #[pyo3(signature = (name, bins=10, seed=42))]
    fn load(name: &str, bins: usize, seed: u64) -> PyResult<Self> {
        let raw = resolve_dataset(name, None, None, None, seed).map_err(err)?;
        Self::prepare(raw, bins, seed)
    }

    /// CSV with a header row; `label` names the label column (last by default).
    #[staticmethod]
    #[pyo3(signature = (path, label=None, bins=10, seed=42))]
    fn from_csv(path: std::path::PathBuf, label: Option<String>, bins: usize, seed: u64) -> PyResult<Self> {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let label = label.map(LabelColumn::Name);
        let raw = resolve_dataset(&name, Some(&path), label, None, seed).map_err(err)?;
        Self::prepare(raw, bins, seed)
    }

    #[staticmethod]
    #[pyo3(signature = (x, y, name="data", bins=10, seed=42))]
    fn from_arrays(x: Vec<Vec<f64>>, y: Vec<usize>, name: &str, bins: usize, seed: u64) -> PyResult<Self> {
        let d = x.first().map_or(0, Vec::len);
        let classes = y.iter().max().map_or(0, |m| m + 1);
        let names = (0..d).map(|j| format!("x{j}")).collect();
        let raw = RawDataset::new(name, names, x, y, classes).map_err(err)?;
        Self::prepare(raw, bins, seed)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.raw.feature_names.clone()
    }

    #[getter]
    fn num_features(&self) -> usize {
        self.inner.train.num_features()
    }

    #[getter]
    fn num_columns(&self) -> usize {
        self.inner.train.num_columns()
    }

    #[getter]
    fn num_classes(&self) -> usize {
        self.inner.train.num_classes()
    }

    /// Column indices owned by each original feature.
    fn feature_groups(&self) -> Vec<Vec<usize>> {
        let map = self.inner.train.feature_map();
        (0..map.num_features()).map(|f| map.columns(f).to_vec()).collect()
    }

    fn train(&self) -> (Rows, Vec<usize>) {
        to_rows(&self.inner.train)
    }

    fn val(&self) -> (Rows, Vec<usize>) {
        to_rows(&self.inner.val)
    }

    fn test(&self) -> (Rows, Vec<usize>) {
        to_rows(&self.inner.test)
    }

    /// Machine trained on the train split with the tuned settings for this
    /// dataset's name.
    #[pyo3(signature = (num_clauses=500, epochs=30, seed=42))]
    fn train_model(&self, py: Python<'_>, num_clauses: usize, epochs: usize, seed: u64) -> PyResult<PyTm> {
        let mut params = HyperParams::for_dataset(&self.inner.name, self.inner.train.num_classes());
        params.num_clauses = num_clauses;
        let params = params.with_balanced_clauses().with_epochs(epochs).with_seed(seed);
        let model = py.detach(|| TmClassifier::train(params, &self.inner.train)).map_err(err)?;
        Ok(PyTm { inner: model })
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(name={:?}, samples={}, features={}, columns={}, classes={})",
            self.inner.name,
            self.inner.raw.n_samples(),
            self.num_features(),
            self.num_columns(),
            self.num_classes()
        )
    }
}

impl PyDataset {
    fn prepare(raw: RawDataset, bins: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: PreparedData::new(raw, bins, seed).map_err(err)?,
        })
    }
}

/// Valid method ids; append `-PosNeg` for the variant where one exists.
#[pyfunction]
fn method_ids() -> Vec<String> {
    MethodSpec::all().iter().map(MethodSpec::label).collect()
}

/// Scores the dataset's features with `method`, using `model` trained on
/// its train split.
#[pyfunction]
#[pyo3(signature = (model, dataset, method, seed=0))]
fn rank_features<'py>(
    py: Python<'py>,
    model: &PyTm,
    dataset: &PyDataset,
    method: &str,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let spec: MethodSpec = method.parse().map_err(err)?;
    let cfg = ScorerConfig {
        seed,
        ..ScorerConfig::default()
    };
    let d = &dataset.inner;
    let fs = py
        .detach(|| {
            let ctx = ScoringContext::new(&model.inner, &d.train, &d.val)?;
            score(spec, &ctx, &cfg)
        })
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("method", fs.label())?;
    out.set_item("category", spec.method.category().as_str())?;
    out.set_item("scores", fs.scores)?;
    out.set_item("ranking", fs.ranking)?;
    out.set_item("rank_time", fs.rank_time)?;
    Ok(out)
}

/// Retrains on the pruned inputs for each k and returns the curve.
#[pyfunction]
#[pyo3(signature = (dataset, ranking, protocol="deletion", k_grid=None, trials=3, num_clauses=500, epochs=30, seed=42))]
#[allow(clippy::too_many_arguments)]
fn pruning_curve<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    ranking: Vec<usize>,
    protocol: &str,
    k_grid: Option<Vec<usize>>,
    trials: usize,
    num_clauses: usize,
    epochs: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let d = &dataset.inner;
    let protocol: Protocol = protocol.parse().map_err(err)?;
    let mut params = HyperParams::for_dataset(&d.name, d.train.num_classes());
    params.num_clauses = num_clauses;
    let cfg = EvalConfig {
        protocol,
        k_grid: k_grid.unwrap_or_else(|| default_k_grid(d.train.num_features())),
        trials,
        model_params: params.with_balanced_clauses().with_epochs(epochs),
        seed,
    };
    let c = py.detach(|| evaluate_curve(d, &ranking, "custom", &cfg)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("protocol", c.protocol.as_str())?;
    out.set_item("k", c.k_values)?;
    out.set_item("mean_acc", c.mean_acc)?;
    out.set_item("std_acc", c.std_acc)?;
    out.set_item("auc", c.auc)?;
    Ok(out)
}

/// `(X, y)` with X in {0, 1}; y is the XOR of the first k features.
#[pyfunction]
#[pyo3(signature = (n=500, d=20, k=5, seed=0))]
fn generate_parity(n: usize, d: usize, k: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    Ok(raw_tuple(data::generate_parity(n, d, k, seed).map_err(err)?))
}

#[pyfunction]
#[pyo3(signature = (n=500, d=20, seed=0))]
fn generate_hierarchical_bool(n: usize, d: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    Ok(raw_tuple(data::generate_hierarchical_bool(n, d, seed).map_err(err)?))
}

#[pyfunction]
#[pyo3(signature = (n=500, d=20, seed=0))]
fn generate_feature_interaction(n: usize, d: usize, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    Ok(raw_tuple(data::generate_feature_interaction(n, d, seed).map_err(err)?))
}

#[pyfunction]
fn spearman(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    analysis::spearman(&a, &b).map_err(err)
}

#[pyfunction]
fn distance_matrix(profiles: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    analysis::distance_matrix(&profiles).map_err(err)
}

/// UPGMA merges as `(a, b, height, size)`; merge t creates cluster n + t.
#[pyfunction]
#[pyo3(signature = (dist, labels=None))]
fn average_linkage(dist: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> PyResult<Vec<(usize, usize, f64, usize)>> {
    let labels = labels.unwrap_or_else(|| (0..dist.len()).map(|i| i.to_string()).collect());
    let d = analysis::average_linkage(&dist, labels).map_err(err)?;
    Ok(d.merges.iter().map(|m| (m.a, m.b, m.height, m.size)).collect())
}

#[pymodule]
fn tmfs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTm>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(method_ids, m)?)?;
    m.add_function(wrap_pyfunction!(rank_features, m)?)?;
    m.add_function(wrap_pyfunction!(pruning_curve, m)?)?;
    m.add_function(wrap_pyfunction!(generate_parity, m)?)?;
    m.add_function(wrap_pyfunction!(generate_hierarchical_bool, m)?)?;
    m.add_function(wrap_pyfunction!(generate_feature_interaction, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(distance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(average_linkage, m)?)?;
    m.add("PROTOCOLS", Protocol::ALL.iter().map(|p| p.as_str()).collect::<Vec<_>>())?;
    m.add("N_METHODS", Method::ALL.len())?;
    Ok(())
}
