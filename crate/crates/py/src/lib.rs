use std::collections::HashMap;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use disint_core::coordinates::{coordinate_system, evaluate, rank_report};
use disint_core::ct_check::check_ct;
use disint_core::disintegration::{build_fa, disintegrate, verify_commute, verify_homotopy_equivalence, Disintegration};
use disint_core::document;
use disint_core::free_group::{same_outer_class, Word};
use disint_core::max_rank::{classify_max_rank, detect_fps, gen_type_c, gen_type_e, rank_audit, FpsKind, Mode};
use disint_core::{AnalysisOptions, MapAnalysis, MarkedGraph};

create_exception!(disint, DisintError, PyValueError);

fn err(e: disint_core::Error) -> PyErr {
    DisintError::new_err(e.to_string())
}

/// A self-map of a marked graph, given by edge images.
#[pyclass(name = "GraphMap", module = "disint", skip_from_py_object)]
#[derive(Clone)]
struct PyGraphMap {
    inner: disint_core::GraphMap,
}

#[pymethods]
impl PyGraphMap {
    /// `edges` are `(name, from, to)`; `images` maps edge names to edge
    /// words such as `"B A'"`.
    #[new]
    fn new(vertices: Vec<String>, edges: Vec<(String, String, String)>, images: HashMap<String, String>) -> PyResult<Self> {
        let g = MarkedGraph::new(&vertices, &edges).map_err(err)?;
        let mut words = Vec::new();
        for (name, _, _) in &edges {
            let w = images.get(name).ok_or_else(|| DisintError::new_err(format!("no image for edge {name}")))?;
            words.push(w.clone());
        }
        if let Some(k) = images.keys().find(|k| !edges.iter().any(|e| &e.0 == *k)) {
            return Err(DisintError::new_err(format!("image given for unknown edge {k}")));
        }
        let inner = disint_core::GraphMap::from_image_strings(g, &words).map_err(err)?;
        Ok(PyGraphMap { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyGraphMap { inner: document::parse(text).map_err(err)?.map })
    }

    fn to_json(&self) -> String {
        document::to_json(&document::to_document(&self.inner, None))
    }

    fn edges(&self) -> Vec<String> {
        let g = self.inner.graph();
        g.edge_ids().map(|e| g.edge_name(e).to_string()).collect()
    }

    fn images(&self) -> Vec<(String, String)> {
        let g = self.inner.graph();
        g.edge_ids().map(|e| (g.edge_name(e).to_string(), g.format_path(&self.inner.edge_image(e)))).collect()
    }

    /// Tightened image of an edge path.
    fn apply(&self, path: &str) -> PyResult<String> {
        let g = self.inner.graph();
        let p = g.parse_path(path).map_err(err)?;
        Ok(g.format_path(&self.inner.apply(&p)))
    }

    /// `self ∘ other`.
    fn compose(&self, other: &PyGraphMap) -> PyResult<PyGraphMap> {
        Ok(PyGraphMap { inner: disint_core::GraphMap::compose(&self.inner, &other.inner).map_err(err)? })
    }

    fn is_homotopy_equivalence(&self) -> bool {
        verify_homotopy_equivalence(&self.inner)
    }

    fn __eq__(&self, other: &PyGraphMap) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let body: Vec<String> = self.images().into_iter().map(|(e, w)| format!("{e} -> {w}")).collect();
        format!("GraphMap({})", body.join(", "))
    }
}

/// A map together with its filtration, Nielsen catalog and disintegration.
#[pyclass(name = "Analysis", module = "disint")]
struct PyAnalysis {
    a: MapAnalysis,
    d: Disintegration,
}

fn mode(name: &str) -> PyResult<Mode> {
    match name {
        "general" => Ok(Mode::General),
        "ia" => Ok(Mode::Ia),
        _ => Err(DisintError::new_err(format!("mode must be 'general' or 'ia', got {name:?}"))),
    }
}

#[pymethods]
impl PyAnalysis {
    #[new]
    #[pyo3(signature = (map, nielsen_bound=None, split_depth=4, periodic_cap=3))]
    fn new(map: &PyGraphMap, nielsen_bound: Option<usize>, split_depth: usize, periodic_cap: usize) -> PyResult<Self> {
        let options = AnalysisOptions { nielsen_bound, split_depth, periodic_cap };
        let a = MapAnalysis::new(map.inner.clone(), options).map_err(err)?;
        let d = disintegrate(&a).map_err(err)?;
        Ok(PyAnalysis { a, d })
    }

    fn strata<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let g = self.a.map.graph();
        self.a
            .strata
            .iter()
            .map(|s| {
                let d = PyDict::new(py);
                d.set_item("index", s.index + 1)?;
                d.set_item("kind", s.label())?;
                d.set_item("edges", s.edges.iter().map(|&e| g.edge_name(e)).collect::<Vec<_>>())?;
                Ok(d)
            })
            .collect()
    }

    fn nielsen_paths(&self) -> Vec<String> {
        let g = self.a.map.graph();
        self.a.catalog.entries.iter().map(|e| g.format_path(&e.path)).collect()
    }

    /// Almost invariant subgraphs as lists of edge names.
    fn classes(&self) -> Vec<Vec<String>> {
        let g = self.a.map.graph();
        self.d.partition.edges.iter().map(|c| c.iter().map(|&e| g.edge_name(e).to_string()).collect()).collect()
    }

    fn relations(&self) -> Vec<String> {
        self.d.relations.iter().map(|r| r.describe()).collect()
    }

    fn lattice_basis(&self) -> Vec<Vec<i64>> {
        self.d.lattice.basis_i64()
    }

    fn rank(&self) -> usize {
        self.d.lattice.rank()
    }

    fn rank_summary(&self) -> String {
        rank_report(&self.d, &coordinate_system(&self.a, &self.d)).summary()
    }

    fn is_admissible(&self, tuple: Vec<i64>) -> bool {
        self.d.lattice.contains(&tuple) && tuple.iter().all(|&x| x >= 0)
    }

    fn nearest_admissible(&self, tuple: Vec<i64>) -> Vec<i64> {
        self.d.lattice.nearest_admissible(&tuple)
    }

    /// The map `f_a`; raises for tuples outside the lattice.
    fn fa(&self, tuple: Vec<i64>) -> PyResult<PyGraphMap> {
        Ok(PyGraphMap { inner: build_fa(&self.a, &self.d, &tuple).map_err(err)? })
    }

    /// `f_a∘f_b = f_b∘f_a = f_{a+b}`, compared edge by edge.
    fn verify_commute(&self, a: Vec<i64>, b: Vec<i64>) -> PyResult<bool> {
        let r = verify_commute(&self.a, &self.d, &a, &b).map_err(err)?;
        Ok(r.commute && r.composite_is_sum)
    }

    /// Exact coordinate values of `f_a`.
    fn coordinates(&self, tuple: Vec<i64>) -> PyResult<Vec<i64>> {
        let cs = coordinate_system(&self.a, &self.d);
        Ok(evaluate(&self.a, &self.d, &cs, &tuple).map_err(err)?.exact())
    }

    fn check_ct<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let r = check_ct(&self.a);
        let d = PyDict::new(py);
        d.set_item("passed", r.passed())?;
        let failed: Vec<&str> = r.clauses.iter().filter(|c| !c.passed).map(|c| c.clause.tag()).collect();
        d.set_item("failed_clauses", failed)?;
        d.set_item("report", r.describe(self.a.map.graph()))?;
        Ok(d)
    }

    /// Rank stages and one dict per audited block.
    #[pyo3(signature = (grouping=None))]
    fn audit<'py>(&self, py: Python<'py>, grouping: Option<Vec<usize>>) -> PyResult<Bound<'py, PyDict>> {
        let r = rank_audit(&self.a, grouping.as_deref()).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("ok", r.ok())?;
        d.set_item("ranks", r.ranks.clone())?;
        let stages = r
            .stages
            .iter()
            .map(|s| {
                let x = PyDict::new(py);
                x.set_item("from", s.from)?;
                x.set_item("to", s.to)?;
                x.set_item("delta_rank", s.delta_rank)?;
                x.set_item("delta_chi", s.delta_chi)?;
                x.set_item("delta", s.delta)?;
                x.set_item("equality", s.equality)?;
                x.set_item("case", s.case.map(|c| c.letter().to_string()))?;
                Ok(x)
            })
            .collect::<PyResult<Vec<_>>>()?;
        d.set_item("stages", stages)?;
        Ok(d)
    }

    /// `(kind, chi_drop)` of each FPS block found.
    fn fps(&self) -> Vec<(String, i64)> {
        detect_fps(&self.a)
            .into_iter()
            .map(|w| {
                let k = match w.kind {
                    FpsKind::Partial => "partial",
                    FpsKind::Full => "full",
                };
                (k.to_string(), w.chi_drop)
            })
            .collect()
    }

    #[pyo3(signature = (mode_name="general"))]
    fn classify(&self, mode_name: &str) -> PyResult<(bool, String)> {
        let c = classify_max_rank(&self.a, mode(mode_name)?).map_err(err)?;
        Ok((c.decomposed(), c.describe(self.a.map.graph())))
    }

    fn to_dot(&self) -> String {
        document::to_dot(&self.a)
    }
}

/// Generic representative of the type E family on the rank `n` model graph.
#[pyfunction]
fn type_e(n: usize) -> PyResult<PyGraphMap> {
    Ok(PyGraphMap { inner: gen_type_e(n).map_err(err)?.generic })
}

/// Generic representative of the type C family twisting by `w`, a word
/// such as `"x1 x2 x1' x2'"`.
#[pyfunction]
#[pyo3(signature = (n, w="x1 x2 x1' x2'"))]
fn type_c(n: usize, w: &str) -> PyResult<PyGraphMap> {
    let w = Word::parse(w).map_err(err)?;
    Ok(PyGraphMap { inner: gen_type_c(n, &w).map_err(err)?.generic })
}

/// A conjugator relating the induced automorphisms, if they agree up to
/// an inner automorphism.
#[pyfunction]
fn outer_conjugator(f: &PyGraphMap, g: &PyGraphMap) -> Option<String> {
    same_outer_class(&f.inner, &g.inner).map(|w| w.format())
}

#[pyfunction]
fn samples() -> Vec<(String, PyGraphMap)> {
    disint_core::samples::all().into_iter().map(|(n, m)| (n.to_string(), PyGraphMap { inner: m })).collect()
}

#[pymodule]
fn disint(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DisintError", m.py().get_type::<DisintError>())?;
    m.add_class::<PyGraphMap>()?;
    m.add_class::<PyAnalysis>()?;
    m.add_function(wrap_pyfunction!(type_e, m)?)?;
    m.add_function(wrap_pyfunction!(type_c, m)?)?;
    m.add_function(wrap_pyfunction!(outer_conjugator, m)?)?;
    m.add_function(wrap_pyfunction!(samples, m)?)?;
    Ok(())
}
