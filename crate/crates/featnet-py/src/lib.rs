//! Python bindings: the graph/feature/matrix types plus generation, fitting
//! and evaluation entry points.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use featnet::estimators::{LlamaConfig, NaiveSmoothing, NodeOrdering, Normalization};
use featnet::eval::{
    aupr, cross_validate, explainability, pr_curve, EstimatorConfig, EvalReport, NegativeDomain,
    ScoredPair,
};
use featnet::io::{load_dataset, save_dataset, DatasetPaths};
use featnet::model::ActivationSpec;
use featnet::synthgen::{generate_one, GraphFamilySpec, IbpParams, WDistribution};

fn err(e: featnet::Error) -> PyErr {
    match e {
        featnet::Error::Io { .. } | featnet::Error::Parse { .. } => {
            PyIOError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A directed graph with dense integer node ids.
#[pyclass(name = "Graph", skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: featnet::FeatureGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, arcs: Vec<(u32, u32)>) -> PyResult<Self> {
        Ok(PyGraph {
            inner: featnet::FeatureGraph::new(n, arcs).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn num_arcs(&self) -> u64 {
        self.inner.num_arcs()
    }

    fn has_arc(&self, src: u32, dst: u32) -> bool {
        self.inner.has_arc(src, dst)
    }

    fn arcs(&self) -> Vec<(u32, u32)> {
        self.inner.arcs().collect()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, arcs={})", self.inner.n(), self.inner.num_arcs())
    }
}

/// Binary node-feature incidence.
#[pyclass(name = "Features", skip_from_py_object)]
#[derive(Clone)]
struct PyFeatures {
    inner: featnet::FeatureAssignment,
}

#[pymethods]
impl PyFeatures {
    #[new]
    fn new(n: usize, m: usize, incidences: Vec<(u32, u32)>) -> PyResult<Self> {
        Ok(PyFeatures {
            inner: featnet::FeatureAssignment::new(n, m, incidences).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn features_of(&self, node: u32) -> PyResult<Vec<u32>> {
        if node as usize >= self.inner.n() {
            return Err(PyValueError::new_err(format!("node {node} out of range")));
        }
        Ok(self.inner.features_of(node).to_vec())
    }

    fn owners_of(&self, feature: u32) -> PyResult<Vec<u32>> {
        if feature as usize >= self.inner.m() {
            return Err(PyValueError::new_err(format!(
                "feature {feature} out of range"
            )));
        }
        Ok(self.inner.owners_of(feature).to_vec())
    }

    /// Reassigns the feature rows to nodes by a seeded random permutation.
    fn permute_nodes(&self, seed: u64) -> PyFeatures {
        PyFeatures {
            inner: featnet::eval::permute_nodes(&self.inner, seed),
        }
    }

    fn __repr__(&self) -> String {
        format!("Features(n={}, m={})", self.inner.n(), self.inner.m())
    }
}

/// The latent feature-feature interaction matrix.
#[pyclass(name = "Matrix", skip_from_py_object)]
#[derive(Clone)]
struct PyMatrix {
    inner: featnet::InteractionMatrix,
}

#[pymethods]
impl PyMatrix {
    #[new]
    fn new(m: usize) -> Self {
        PyMatrix {
            inner: featnet::InteractionMatrix::zeros(m),
        }
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn background(&self) -> f64 {
        self.inner.background()
    }

    fn get(&self, h: u32, k: u32) -> PyResult<f64> {
        self.inner.try_get(h, k).map_err(err)
    }

    fn set(&mut self, h: u32, k: u32, value: f64) -> PyResult<()> {
        self.inner.try_set(h, k, value).map_err(err)
    }

    /// Entries differing from the background, as (h, k, value) sorted rows.
    fn entries(&self) -> Vec<(u32, u32, f64)> {
        self.inner.entries()
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.inner.frobenius_norm_sq()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        featnet::io::save_matrix(&self.inner, &path).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<PyMatrix> {
        Ok(PyMatrix {
            inner: featnet::io::load_matrix(&path).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Matrix(m={})", self.inner.m())
    }
}

fn parse_family(family: &str, theta: f64, k: f64) -> PyResult<(ActivationSpec, WDistribution)> {
    let spec = match family {
        "chi-bernoulli" => (
            ActivationSpec::Step { threshold: 0.0 },
            WDistribution::BernoulliTen,
        ),
        "chi-normal" => (
            ActivationSpec::Step { threshold: 0.0 },
            WDistribution::NormalMatched,
        ),
        "sigmoid-bernoulli" => (
            ActivationSpec::Sigmoid { theta, k },
            WDistribution::BernoulliTen,
        ),
        "sigmoid-normal" => (
            ActivationSpec::Sigmoid { theta, k },
            WDistribution::NormalMatched,
        ),
        "exp-bernoulli" => (ActivationSpec::ExpClipped, WDistribution::BernoulliOne),
        "exp-normal" => (ActivationSpec::ExpClipped, WDistribution::NormalMatchedOne),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown family {other:?}; expected e.g. \"chi-bernoulli\""
            )))
        }
    };
    Ok(spec)
}

/// Generates one synthetic replicate of a named graph family.
#[pyfunction]
#[pyo3(signature = (family, n, seed=0, replicate=0, theta=0.0, k=5.0))]
fn generate(
    family: &str,
    n: usize,
    seed: u64,
    replicate: u64,
    theta: f64,
    k: f64,
) -> PyResult<(PyGraph, PyFeatures, PyMatrix)> {
    let (activation, wdist) = parse_family(family, theta, k)?;
    let spec = GraphFamilySpec {
        n,
        activation,
        wdist,
        ibp: IbpParams::standard(0),
        seed,
    };
    let (z, w, g) = generate_one(&spec, replicate).map_err(err)?;
    Ok((
        PyGraph { inner: g },
        PyFeatures { inner: z },
        PyMatrix { inner: w },
    ))
}

fn llama_config(kappa: f64, seed: u64, row_l2: bool, symmetric: bool) -> LlamaConfig {
    LlamaConfig {
        kappa,
        normalization: if row_l2 {
            Normalization::RowL2
        } else {
            Normalization::None
        },
        ordering: NodeOrdering::Random,
        seed,
        symmetric_updates: symmetric,
    }
}

/// Single-pass passive-aggressive fit; returns the matrix and diagnostics.
#[pyfunction]
#[pyo3(signature = (graph, features, kappa=1.5, seed=0, row_l2=false, symmetric=false))]
fn llama_fit(
    graph: &PyGraph,
    features: &PyFeatures,
    kappa: f64,
    seed: u64,
    row_l2: bool,
    symmetric: bool,
) -> PyResult<(PyMatrix, HashMap<String, u64>)> {
    let cfg = llama_config(kappa, seed, row_l2, symmetric);
    let (w, diag) =
        featnet::estimators::llama_fit(&graph.inner, &features.inner, &cfg).map_err(err)?;
    let mut out = HashMap::new();
    out.insert("mistakes".to_string(), diag.mistakes);
    out.insert("radius_sq".to_string(), diag.radius_sq);
    out.insert("examples_seen".to_string(), diag.examples_seen);
    out.insert("skipped".to_string(), diag.skipped);
    Ok((PyMatrix { inner: w }, out))
}

fn parse_smoothing(smoothing: &str, floor: f64) -> PyResult<NaiveSmoothing> {
    match smoothing {
        "floor" => Ok(NaiveSmoothing::Floor(floor)),
        "add-one" => Ok(NaiveSmoothing::AddOne),
        other => Err(PyValueError::new_err(format!(
            "unknown smoothing {other:?}; expected \"floor\" or \"add-one\""
        ))),
    }
}

/// Closed-form log co-occurrence estimator.
#[pyfunction]
#[pyo3(signature = (graph, features, smoothing="floor", floor=-50.0))]
fn naive_estimate(
    graph: &PyGraph,
    features: &PyFeatures,
    smoothing: &str,
    floor: f64,
) -> PyResult<PyMatrix> {
    let smoothing = parse_smoothing(smoothing, floor)?;
    Ok(PyMatrix {
        inner: featnet::estimators::naive_estimate(&graph.inner, &features.inner, smoothing)
            .map_err(err)?,
    })
}

/// Bilinear score of a node pair under a fitted matrix.
#[pyfunction]
fn score(features: &PyFeatures, w: &PyMatrix, i: u32, j: u32) -> PyResult<f64> {
    let z = &features.inner;
    if i as usize >= z.n() || j as usize >= z.n() {
        return Err(PyValueError::new_err("node id out of range"));
    }
    featnet::score(z.features_of(i), z.features_of(j), &w.inner).map_err(err)
}

fn parse_domain(domain: &str) -> PyResult<NegativeDomain> {
    match domain {
        "test-induced" => Ok(NegativeDomain::TestInduced),
        "global" => Ok(NegativeDomain::Global),
        other => Err(PyValueError::new_err(format!(
            "unknown negative domain {other:?}"
        ))),
    }
}

fn report_to_py(py: Python<'_>, report: &EvalReport) -> PyResult<Py<PyAny>> {
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("per_fold_aupr", report.per_fold_aupr.clone())?;
    dict.set_item("mean", report.mean)?;
    dict.set_item("std", report.std)?;
    dict.set_item("skipped_folds", report.skipped_folds.clone())?;
    Ok(dict.into_any().unbind())
}

/// K-fold cross-validated AUPR of an estimator.
#[pyfunction]
#[pyo3(signature = (graph, features, estimator="llama", k=10, seed=42, negative_domain="test-induced", kappa=1.5, smoothing="floor", floor=-50.0, lambda_=1.0))]
#[allow(clippy::too_many_arguments)]
fn cross_validate_py(
    py: Python<'_>,
    graph: &PyGraph,
    features: &PyFeatures,
    estimator: &str,
    k: usize,
    seed: u64,
    negative_domain: &str,
    kappa: f64,
    smoothing: &str,
    floor: f64,
    lambda_: f64,
) -> PyResult<Py<PyAny>> {
    let config = match estimator {
        "llama" => EstimatorConfig::Llama(llama_config(kappa, 0, false, false)),
        "naive" => EstimatorConfig::Naive {
            smoothing: parse_smoothing(smoothing, floor)?,
        },
        "perceptron" => EstimatorConfig::Perceptron {
            lambda: lambda_,
            ordering: NodeOrdering::Random,
        },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown estimator {other:?}"
            )))
        }
    };
    let report = cross_validate(
        &graph.inner,
        &features.inner,
        &config,
        k,
        seed,
        parse_domain(negative_domain)?,
    )
    .map_err(err)?;
    report_to_py(py, &report)
}

/// Mean cross-validated AUPR of the online learner for a feature set.
#[pyfunction]
#[pyo3(signature = (graph, features, k=10, seed=42, kappa=1.5))]
fn explainability_py(
    py: Python<'_>,
    graph: &PyGraph,
    features: &PyFeatures,
    k: usize,
    seed: u64,
    kappa: f64,
) -> PyResult<Py<PyAny>> {
    let cfg = llama_config(kappa, 0, false, false);
    let report = explainability(&graph.inner, &features.inner, &cfg, k, seed).map_err(err)?;
    report_to_py(py, &report)
}

/// Tie-aware AUPR of scored examples given as parallel score/label lists.
#[pyfunction]
fn aupr_from_scores(scores: Vec<f64>, labels: Vec<i32>) -> PyResult<f64> {
    if scores.len() != labels.len() {
        return Err(PyValueError::new_err("scores and labels differ in length"));
    }
    let pairs: Vec<ScoredPair> = scores
        .iter()
        .zip(&labels)
        .enumerate()
        .map(|(i, (&score, &label))| ScoredPair {
            src: i as u32,
            dst: i as u32,
            score,
            label: if label > 0 { 1 } else { -1 },
        })
        .collect();
    let curve = pr_curve(&pairs).map_err(err)?;
    Ok(aupr(&curve))
}

/// Precision-recall points of scored examples: list of (recall, precision).
#[pyfunction]
fn pr_points(scores: Vec<f64>, labels: Vec<i32>) -> PyResult<Vec<(f64, f64)>> {
    if scores.len() != labels.len() {
        return Err(PyValueError::new_err("scores and labels differ in length"));
    }
    let pairs: Vec<ScoredPair> = scores
        .iter()
        .zip(&labels)
        .enumerate()
        .map(|(i, (&score, &label))| ScoredPair {
            src: i as u32,
            dst: i as u32,
            score,
            label: if label > 0 { 1 } else { -1 },
        })
        .collect();
    let curve = pr_curve(&pairs).map_err(err)?;
    Ok(curve.points)
}

/// Loads a TSV dataset (edge list + feature incidence).
#[pyfunction]
fn load_dataset_py(edges: PathBuf, features: PathBuf) -> PyResult<(PyGraph, PyFeatures)> {
    let ds = load_dataset(&DatasetPaths { edges, features }).map_err(err)?;
    Ok((
        PyGraph { inner: ds.graph },
        PyFeatures {
            inner: ds.features,
        },
    ))
}

/// Writes a dataset as TSV files with numeric ids.
#[pyfunction]
fn save_dataset_py(
    graph: &PyGraph,
    features: &PyFeatures,
    edges: PathBuf,
    features_path: PathBuf,
) -> PyResult<()> {
    save_dataset(
        &graph.inner,
        &features.inner,
        &DatasetPaths {
            edges,
            features: features_path,
        },
    )
    .map_err(err)
}

#[pymodule]
fn featnet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyFeatures>()?;
    m.add_class::<PyMatrix>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(llama_fit, m)?)?;
    m.add_function(wrap_pyfunction!(naive_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(aupr_from_scores, m)?)?;
    m.add_function(wrap_pyfunction!(pr_points, m)?)?;
    m.add("cross_validate", wrap_pyfunction!(cross_validate_py, m)?)?;
    m.add("explainability", wrap_pyfunction!(explainability_py, m)?)?;
    m.add("load_dataset", wrap_pyfunction!(load_dataset_py, m)?)?;
    m.add("save_dataset", wrap_pyfunction!(save_dataset_py, m)?)?;
    Ok(())
}
