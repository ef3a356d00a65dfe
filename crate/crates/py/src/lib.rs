//! Python bindings: graphs, parameters, reach indexes, route enumeration and
//! the brute-force oracle.

use std::fs::File;
use std::io::BufReader;

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use revc::io::RouteRecord;
use revc::params::{Ablation, RevcParams};
use revc::reach::{compute_reach_bounds, ReachIndex};
use revc::compare::compare as compare_with_oracle;
use revc::{oracle, pipeline, synth, Graph, PerturbationSpec, RevcError, VertexId};

fn err(e: RevcError) -> PyErr {
    match e {
        RevcError::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Graph", frozen, module = "pyrevc")]
pub struct PyGraph {
    inner: Graph,
}

impl PyGraph {
    fn ids(&self, labels: &[String]) -> PyResult<Vec<VertexId>> {
        labels.iter().map(|l| self.inner.vertex(l).ok_or_else(|| PyKeyError::new_err(format!("unknown vertex {l:?}")))).collect()
    }

    fn pairs(&self, pairs: Vec<(String, String)>) -> PyResult<Vec<(VertexId, VertexId)>> {
        pairs
            .into_iter()
            .map(|(s, t)| {
                let ids = self.ids(&[s, t])?;
                Ok((ids[0], ids[1]))
            })
            .collect()
    }
}

#[pymethods]
impl PyGraph {
    /// Reads a tab-separated edge list from a file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let f = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Graph::load(BufReader::new(f)).map(|inner| PyGraph { inner }).map_err(err)
    }

    /// Parses a tab-separated edge list held in a string.
    #[staticmethod]
    fn from_tsv(text: &str) -> PyResult<Self> {
        Graph::load_str(text).map(|inner| PyGraph { inner }).map_err(err)
    }

    /// Synthetic road-like graph of about `vertices` vertices.
    #[staticmethod]
    #[pyo3(signature = (vertices, seed=0))]
    fn random_road(vertices: usize, seed: u64) -> Self {
        PyGraph { inner: synth::random_road_graph(vertices, seed) }
    }

    fn to_tsv(&self) -> String {
        self.inner.to_tsv()
    }

    /// Copy with every cost scaled by an independent factor in `1 ± magnitude`.
    #[pyo3(signature = (magnitude=1e-6, seed=0))]
    fn perturbed(&self, magnitude: f64, seed: u64) -> PyResult<Self> {
        let spec = PerturbationSpec::new(magnitude, seed).map_err(err)?;
        Ok(PyGraph { inner: self.inner.perturb_costs(&spec) })
    }

    /// Copy without dead-end trees that contain none of `keep`.
    fn trim_dead_ends(&self, keep: Vec<String>) -> PyResult<Self> {
        self.inner.trim_dead_ends(&keep).map(|inner| PyGraph { inner }).map_err(err)
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.inner.num_vertices()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    /// Total cost of a vertex sequence, or None if some step has no edge.
    fn path_cost(&self, vertices: Vec<String>) -> PyResult<Option<f64>> {
        Ok(self.inner.path_cost(&self.ids(&vertices)?))
    }

    /// Exact local optimality factor of a route given as vertex labels.
    fn local_optimality_factor(&self, vertices: Vec<String>) -> PyResult<f64> {
        let seq = self.ids(&vertices)?;
        if self.inner.path_cost(&seq).is_none() {
            return Err(PyValueError::new_err("vertex sequence is not a path"));
        }
        Ok(oracle::local_optimality_factor(&self.inner, &seq, &mut oracle::DistanceMemo::default()))
    }

    fn __repr__(&self) -> String {
        format!("Graph(vertices={}, edges={})", self.inner.num_vertices(), self.inner.num_edges())
    }
}

#[pyclass(name = "Params", frozen, from_py_object, module = "pyrevc")]
#[derive(Clone)]
pub struct PyParams {
    inner: RevcParams,
}

#[pymethods]
impl PyParams {
    /// `ablations` names switches such as "no_prune" or "no_sp_cache".
    #[new]
    #[pyo3(signature = (alpha=0.2, beta=1.5, gamma=0.9, delta=1.1, ablations=Vec::new()))]
    fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, ablations: Vec<String>) -> PyResult<Self> {
        let mut ab = Ablation::default();
        for name in &ablations {
            let one = Ablation::single(name).ok_or_else(|| PyValueError::new_err(format!("unknown ablation {name:?}")))?;
            ab = merge(ab, one);
        }
        let inner = RevcParams::new(alpha, beta, gamma, delta).map_err(err)?.with_ablation(ab);
        Ok(PyParams { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    /// Shortest-path queries allowed per candidate, None when unbounded.
    #[getter]
    fn query_budget(&self) -> Option<u64> {
        self.inner.query_budget()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("Params(alpha={}, beta={}, gamma={}, delta={})", p.alpha, p.beta, p.gamma, p.delta)
    }
}

fn merge(a: Ablation, b: Ablation) -> Ablation {
    Ablation {
        no_dmin_prune: a.no_dmin_prune || b.no_dmin_prune,
        no_prune: a.no_prune || b.no_prune,
        naive_tree_bound: a.naive_tree_bound || b.naive_tree_bound,
        no_dedup_neighbours: a.no_dedup_neighbours || b.no_dedup_neighbours,
        no_dedup: a.no_dedup || b.no_dedup,
        no_batch_lo: a.no_batch_lo || b.no_batch_lo,
        no_sp_cache: a.no_sp_cache || b.no_sp_cache,
    }
}

#[pyclass(name = "ReachIndex", frozen, module = "pyrevc")]
pub struct PyReachIndex {
    inner: ReachIndex,
}

#[pymethods]
impl PyReachIndex {
    /// Reach bounds for `graph`, with shortcuts up to `shortcut_cap`.
    #[staticmethod]
    #[pyo3(signature = (graph, shortcut_cap=0.0))]
    fn build(py: Python<'_>, graph: &PyGraph, shortcut_cap: f64) -> PyResult<Self> {
        if !(shortcut_cap >= 0.0 && shortcut_cap.is_finite()) {
            return Err(PyValueError::new_err("shortcut_cap must be finite and non-negative"));
        }
        let inner = py.detach(|| compute_reach_bounds(&graph.inner, shortcut_cap));
        Ok(PyReachIndex { inner })
    }

    /// Index that prunes nothing.
    #[staticmethod]
    fn unbounded(graph: &PyGraph) -> Self {
        PyReachIndex { inner: ReachIndex::unbounded(graph.inner.num_vertices()) }
    }

    #[getter]
    fn bounds(&self) -> Vec<f64> {
        self.inner.bound.clone()
    }

    #[getter]
    fn num_shortcuts(&self) -> usize {
        self.inner.shortcuts.len()
    }
}

#[pyclass(name = "Route", frozen, get_all, module = "pyrevc")]
pub struct PyRoute {
    origin: String,
    destination: String,
    via: String,
    cost: f64,
    /// Proven lower bound on the local optimality factor.
    guaranteed_alpha: f64,
    /// Exact factor; only set for oracle routes.
    exact_factor: Option<f64>,
    vertices: Vec<String>,
}

impl From<RouteRecord> for PyRoute {
    fn from(r: RouteRecord) -> Self {
        PyRoute {
            origin: r.origin,
            destination: r.destination,
            via: r.via,
            cost: r.cost,
            guaranteed_alpha: r.guaranteed_alpha,
            exact_factor: r.exact_factor,
            vertices: r.vertices,
        }
    }
}

#[pymethods]
impl PyRoute {
    fn __repr__(&self) -> String {
        format!("Route({} -> {} via {}, cost={})", self.origin, self.destination, self.via, self.cost)
    }
}

#[pyclass(name = "RouteSet", frozen, get_all, module = "pyrevc")]
pub struct PyRouteSet {
    routes: Vec<Py<PyRoute>>,
    /// Run statistics as a dict.
    report: Py<PyDict>,
    /// Oracle comparison verdicts; None unless requested.
    comparison: Option<Py<PyDict>>,
}

fn to_dict<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyDict>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let obj = py.import("json")?.call_method1("loads", (text,))?;
    Ok(obj.cast_into::<PyDict>()?.unbind())
}

/// Admissible routes for every `(origin, destination)` label pair.
///
/// Without an index one is built with no shortcuts. With `compare` the
/// result is checked against the brute-force oracle.
#[pyfunction]
#[pyo3(signature = (graph, pairs, params=None, index=None, compare=false))]
fn routes(
    py: Python<'_>,
    graph: &PyGraph,
    pairs: Vec<(String, String)>,
    params: Option<PyParams>,
    index: Option<&PyReachIndex>,
    compare: bool,
) -> PyResult<PyRouteSet> {
    let g = &graph.inner;
    let params = match params {
        Some(p) => p.inner,
        None => RevcParams::new(0.2, 1.5, 0.9, 1.1).map_err(err)?,
    };
    let ids = graph.pairs(pairs)?;
    if compare {
        oracle::check_size(g, false).map_err(err)?;
    }
    let (out, cmp) = py
        .detach(|| {
            let built;
            let idx = match index {
                Some(i) => &i.inner,
                None => {
                    built = compute_reach_bounds(g, 0.0);
                    &built
                }
            };
            let out = pipeline::run(g, idx, &ids, &params)?;
            let cmp = compare.then(|| compare_with_oracle(g, &out, &params));
            Ok((out, cmp))
        })
        .map_err(err)?;
    let routes = out
        .routes
        .iter()
        .map(|r| Py::new(py, PyRoute::from(RouteRecord::from_route(g, r))))
        .collect::<PyResult<Vec<_>>>()?;
    let comparison = match cmp {
        Some(c) => {
            let d = to_dict(py, &c)?;
            let b = d.bind(py);
            b.set_item("sandwich_holds", c.sandwich_holds())?;
            b.set_item("exact_match", c.exact_match())?;
            Some(d)
        }
        None => None,
    };
    Ok(PyRouteSet { routes, report: to_dict(py, &out.report)?, comparison })
}

/// Brute-force admissible routes for one pair, with exact factors.
#[pyfunction]
#[pyo3(signature = (graph, origin, destination, alpha=0.2, beta=1.5, force=false))]
fn oracle_routes(
    py: Python<'_>,
    graph: &PyGraph,
    origin: String,
    destination: String,
    alpha: f64,
    beta: f64,
    force: bool,
) -> PyResult<Vec<PyRoute>> {
    let g = &graph.inner;
    oracle::check_size(g, force).map_err(err)?;
    RevcParams::new(alpha, beta, 1.0, 1.0).map_err(err)?;
    let ids = graph.ids(&[origin, destination])?;
    let found = py.detach(|| oracle::oracle_admissible(g, ids[0], ids[1], alpha, beta));
    Ok(found.iter().map(|r| RouteRecord::from_oracle(g, r).into()).collect())
}

#[pymodule]
fn pyrevc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    init(m)
}

/// Registers every class and function on `m`.
pub fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyParams>()?;
    m.add_class::<PyReachIndex>()?;
    m.add_class::<PyRoute>()?;
    m.add_class::<PyRouteSet>()?;
    m.add_function(wrap_pyfunction!(routes, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_routes, m)?)?;
    Ok(())
}
