//! Python bindings: zoo fields, parabola projection, graph distance fields,
//! grids, the verdict engine and the individual witnesses.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use unitgrad::distfield::{self, GraphSpec, GridSpec, ProjectionOptions};
use unitgrad::numcore::{self, Domain, ScalarField, Tolerances as CoreTolerances, VecN};
use unitgrad::witness::{self, ClassifyOptions, FixedPointOptions, FixedPointVariant, Line, Mode, RunInfo};
use unitgrad::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::NonConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn vecn(c: Vec<f64>) -> PyResult<VecN> {
    VecN::new(c).map_err(err)
}

fn json_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

/// Numerical tolerances; every keyword defaults to the library value.
#[pyclass(name = "Tolerances", from_py_object)]
#[derive(Clone)]
struct PyTolerances {
    inner: CoreTolerances,
}

#[pymethods]
impl PyTolerances {
    #[new]
    #[pyo3(signature = (tol_grad_norm=None, tol_residual=None, tol_equal=None, fd_step=None, singular_margin=None))]
    fn new(
        tol_grad_norm: Option<f64>,
        tol_residual: Option<f64>,
        tol_equal: Option<f64>,
        fd_step: Option<f64>,
        singular_margin: Option<f64>,
    ) -> PyResult<Self> {
        let d = CoreTolerances::default();
        let inner = CoreTolerances {
            tol_grad_norm: tol_grad_norm.unwrap_or(d.tol_grad_norm),
            tol_residual: tol_residual.unwrap_or(d.tol_residual),
            tol_equal: tol_equal.unwrap_or(d.tol_equal),
            fd_step: fd_step.unwrap_or(d.fd_step),
            singular_margin: singular_margin.unwrap_or(d.singular_margin),
        };
        inner.validate().map_err(err)?;
        Ok(PyTolerances { inner })
    }

    #[getter]
    fn tol_grad_norm(&self) -> f64 {
        self.inner.tol_grad_norm
    }
    #[getter]
    fn tol_residual(&self) -> f64 {
        self.inner.tol_residual
    }
    #[getter]
    fn tol_equal(&self) -> f64 {
        self.inner.tol_equal
    }
    #[getter]
    fn fd_step(&self) -> f64 {
        self.inner.fd_step
    }
    #[getter]
    fn singular_margin(&self) -> f64 {
        self.inner.singular_margin
    }

    fn __repr__(&self) -> String {
        format!("Tolerances({})", self.inner)
    }
}

fn tolerances(t: Option<PyTolerances>) -> CoreTolerances {
    t.map(|t| t.inner).unwrap_or_default()
}

/// A scalar field built from a zoo spec such as `"affine:0.6,0.8:1"`.
#[pyclass(name = "Field", frozen)]
struct PyField {
    inner: ScalarField,
}

#[pymethods]
impl PyField {
    /// `dim` defaults to the dimension fixed by the spec, else 2.
    #[new]
    #[pyo3(signature = (spec, dim=None))]
    fn new(spec: &str, dim: Option<usize>) -> PyResult<Self> {
        let parsed: numcore::ZooSpec = spec.parse().map_err(err)?;
        let dim = dim.or(parsed.natural_dim()).unwrap_or(2);
        Ok(PyField {
            inner: parsed.build(dim).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    #[getter]
    fn label(&self) -> &str {
        &self.inner.label
    }
    #[getter]
    fn convex(&self) -> bool {
        self.inner.claims.convex
    }
    #[getter]
    fn differentiable(&self) -> bool {
        self.inner.claims.differentiable
    }

    fn value(&self, u: Vec<f64>) -> PyResult<f64> {
        self.inner.value(&vecn(u)?).map_err(err)
    }

    fn gradient(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.inner.gradient(&vecn(u)?).map_err(err)?.into_inner())
    }

    #[pyo3(signature = (u, step=numcore::DEFAULT_FD_STEP))]
    fn fd_gradient(&self, u: Vec<f64>, step: f64) -> PyResult<Vec<f64>> {
        Ok(numcore::fd_gradient(&self.inner, &vecn(u)?, step).map_err(err)?.into_inner())
    }

    fn negated(&self) -> PyField {
        PyField {
            inner: self.inner.negated(),
        }
    }

    /// `u ↦ f(u + offset) + lift`.
    fn shifted(&self, offset: Vec<f64>, lift: f64) -> PyResult<PyField> {
        Ok(PyField {
            inner: self.inner.shifted(&vecn(offset)?, lift).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Field('{}', dim={})", self.inner.label, self.inner.dim())
    }
}

fn domain(
    dim: usize,
    lo: Option<Vec<f64>>,
    hi: Option<Vec<f64>>,
    center: Option<Vec<f64>>,
    radius: Option<f64>,
) -> PyResult<Domain> {
    match (lo, hi, center, radius) {
        (Some(lo), Some(hi), None, None) => Domain::new_box(vecn(lo)?, vecn(hi)?).map_err(err),
        (None, None, Some(c), Some(r)) => Domain::new_ball(vecn(c)?, r).map_err(err),
        (None, None, None, None) => Domain::cube(dim, 2.0).map_err(err),
        _ => Err(PyValueError::new_err("give either lo and hi, or center and radius")),
    }
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    mode.parse().map_err(err)
}

/// Classifies a field and returns the verdict document as a dict. The
/// domain is a box (`lo`, `hi`), a ball (`center`, `radius`) or [-2, 2]^dim.
/// With `witness_radius` set, the proof-step witnesses run too.
#[pyfunction]
#[pyo3(signature = (field, lo=None, hi=None, center=None, radius=None, mode="convex", seed=0, samples=256, tolerances=None, witness_radius=None))]
#[allow(clippy::too_many_arguments)]
fn classify(
    py: Python<'_>,
    field: &PyField,
    lo: Option<Vec<f64>>,
    hi: Option<Vec<f64>>,
    center: Option<Vec<f64>>,
    radius: Option<f64>,
    mode: &str,
    seed: u64,
    samples: usize,
    tolerances: Option<PyTolerances>,
    witness_radius: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let dom = domain(field.inner.dim(), lo, hi, center, radius)?;
    let mode = parse_mode(mode)?;
    let tol = self::tolerances(tolerances);
    let opts = ClassifyOptions {
        samples,
        seed,
        ..Default::default()
    };
    let f = &field.inner;
    let verdict = py
        .detach(|| match witness_radius {
            Some(r) => witness::run_witness(f, &dom, r, &tol, mode, &opts),
            None => witness::classify_field(f, &dom, &tol, mode, &opts),
        })
        .map_err(err)?;
    let doc = verdict.to_json(&RunInfo {
        field: &f.label,
        domain: &dom,
        mode,
        seed,
        tolerances: &tol,
    });
    json_to_py(py, &doc)
}

#[pyfunction]
#[pyo3(signature = (field, r, seed=0, max_iter=5000))]
fn brouwer_fixed_point(py: Python<'_>, field: &PyField, r: f64, seed: u64, max_iter: usize) -> PyResult<Py<PyAny>> {
    let opts = FixedPointOptions {
        seed,
        max_iter,
        ..Default::default()
    };
    let res = py.detach(|| witness::brouwer_fixed_point(&field.inner, r, &opts)).map_err(err)?;
    to_py(py, &res)
}

#[pyfunction]
#[pyo3(signature = (field, r, seed=0, max_iter=5000))]
fn resolvent_point(py: Python<'_>, field: &PyField, r: f64, seed: u64, max_iter: usize) -> PyResult<Py<PyAny>> {
    let opts = FixedPointOptions {
        seed,
        max_iter,
        ..Default::default()
    };
    let res = py.detach(|| witness::resolvent_point(&field.inner, r, &opts)).map_err(err)?;
    to_py(py, &res)
}

/// `±u_r / r` at the smallest radius; `variant` is `brouwer` or `resolvent`.
#[pyfunction]
#[pyo3(signature = (field, radii, variant="brouwer"))]
fn limit_direction(py: Python<'_>, field: &PyField, radii: Vec<f64>, variant: &str) -> PyResult<Vec<f64>> {
    let variant = match variant {
        "brouwer" => FixedPointVariant::Brouwer,
        "resolvent" => FixedPointVariant::Resolvent,
        other => return Err(PyValueError::new_err(format!("unknown variant `{other}`"))),
    };
    let lim = py
        .detach(|| witness::limit_direction(&field.inner, &radii, variant, &FixedPointOptions::default()))
        .map_err(err)?;
    Ok(lim.direction.into_inner())
}

#[pyfunction]
#[pyo3(signature = (field, u, s_min=-10.0, s_max=10.0, samples=41))]
fn ray_deviation(field: &PyField, u: Vec<f64>, s_min: f64, s_max: f64, samples: usize) -> PyResult<f64> {
    witness::ray_deviation(&field.inner, &vecn(u)?, s_min, s_max, samples).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (field, u, s_min=-10.0, s_max=10.0, samples=41))]
fn ray_gradient_drift(field: &PyField, u: Vec<f64>, s_min: f64, s_max: f64, samples: usize) -> PyResult<f64> {
    witness::ray_gradient_drift(&field.inner, &vecn(u)?, s_min, s_max, samples).map_err(err)
}

#[pyfunction]
fn first_order_gap(field: &PyField, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    witness::first_order_gap(&field.inner, &vecn(u)?, &vecn(v)?).map_err(err)
}

#[pyfunction]
fn monotonicity_gap(field: &PyField, u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    witness::monotonicity_gap(&field.inner, &vecn(u)?, &vecn(v)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (field, u, v, tolerances=None))]
fn line_pair_witness(
    py: Python<'_>,
    field: &PyField,
    u: Vec<f64>,
    v: Vec<f64>,
    tolerances: Option<PyTolerances>,
) -> PyResult<Py<PyAny>> {
    let tol = self::tolerances(tolerances);
    let rep = witness::line_pair_witness(&field.inner, &vecn(u)?, &vecn(v)?, &tol).map_err(err)?;
    to_py(py, &rep)
}

/// Closest points of `b1 + s·d1` and `b2 + t·d2` (directions normalised).
#[pyfunction]
fn closest_points_between_lines(
    py: Python<'_>,
    b1: Vec<f64>,
    d1: Vec<f64>,
    b2: Vec<f64>,
    d2: Vec<f64>,
) -> PyResult<Py<PyAny>> {
    let l1 = Line::new(vecn(b1)?, vecn(d1)?).map_err(err)?;
    let l2 = Line::new(vecn(b2)?, vecn(d2)?).map_err(err)?;
    let res = witness::closest_points_between_lines(&l1, &l2).map_err(err)?;
    to_py(py, &res)
}

#[pyfunction]
fn parabola_projection(u1: f64, u2: f64) -> PyResult<f64> {
    distfield::parabola_projection(&vecn(vec![u1, u2])?).map_err(err)
}

#[pyfunction]
fn parabola_discriminant(u1: f64, u2: f64) -> PyResult<f64> {
    distfield::parabola_discriminant(&vecn(vec![u1, u2])?).map_err(err)
}

#[pyfunction]
fn parabola_cubic_residual(u1: f64, u2: f64, x: f64) -> PyResult<f64> {
    distfield::parabola_cubic_residual(&vecn(vec![u1, u2])?, x).map_err(err)
}

/// `OnGraph`, `MultiRoot`, `CuspCondition` or `Regular`.
#[pyfunction]
#[pyo3(signature = (u1, u2, tolerances=None))]
fn classify_singularity(u1: f64, u2: f64, tolerances: Option<PyTolerances>) -> PyResult<&'static str> {
    let tol = self::tolerances(tolerances);
    Ok(distfield::classify_singularity(&vecn(vec![u1, u2])?, &tol).map_err(err)?.as_str())
}

/// Nearest point of a named graph (`parabola`, `sine`, `paraboloid3`).
#[pyfunction]
#[pyo3(signature = (graph, u, seed=0))]
fn project_to_graph(py: Python<'_>, graph: &str, u: Vec<f64>, seed: u64) -> PyResult<Py<PyAny>> {
    let graph = GraphSpec::from_name(graph).map_err(err)?;
    let opts = ProjectionOptions {
        seed,
        ..Default::default()
    };
    let p = distfield::project_to_graph(&graph, &vecn(u)?, &opts).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("minimizer", p.minimizer)?;
    dict.set_item("foot", p.foot.into_inner())?;
    dict.set_item("value", p.value)?;
    dict.set_item("stationarity_residual", p.stationarity_residual)?;
    dict.set_item("multiple", p.multiple)?;
    Ok(dict.into_any().unbind())
}

/// `(value, gradient)` of the distance to a named graph.
#[pyfunction]
#[pyo3(signature = (graph, u, tolerances=None))]
fn distance_field(graph: &str, u: Vec<f64>, tolerances: Option<PyTolerances>) -> PyResult<(f64, Vec<f64>)> {
    let graph = GraphSpec::from_name(graph).map_err(err)?;
    let tol = self::tolerances(tolerances);
    let s = distfield::evaluate_distance_field(&graph, &vecn(u)?, &tol).map_err(err)?;
    Ok((s.value, s.grad.into_inner()))
}

/// Distance grid of a planar graph as a dict of columns, row-major with
/// `u2` ascending in the outer loop.
#[pyfunction]
#[pyo3(signature = (graph="parabola", lo=(-2.0, -2.0), hi=(2.0, 2.0), nx=200, ny=200, tolerances=None))]
fn emit_grid(
    py: Python<'_>,
    graph: &str,
    lo: (f64, f64),
    hi: (f64, f64),
    nx: usize,
    ny: usize,
    tolerances: Option<PyTolerances>,
) -> PyResult<Py<PyAny>> {
    let graph = GraphSpec::from_name(graph).map_err(err)?;
    let spec = GridSpec::new([lo.0, lo.1], [hi.0, hi.1], nx, ny).map_err(err)?;
    let tol = self::tolerances(tolerances);
    let grid = py.detach(|| distfield::emit_grid(&graph, &spec, &tol)).map_err(err)?;
    let dict = PyDict::new(py);
    let r = &grid.records;
    dict.set_item("u1", r.iter().map(|x| x.u1).collect::<Vec<_>>())?;
    dict.set_item("u2", r.iter().map(|x| x.u2).collect::<Vec<_>>())?;
    dict.set_item("value", r.iter().map(|x| x.value).collect::<Vec<_>>())?;
    dict.set_item("gradnorm", r.iter().map(|x| x.gradnorm).collect::<Vec<_>>())?;
    dict.set_item("class", r.iter().map(|x| x.class.as_str()).collect::<Vec<_>>())?;
    Ok(dict.into_any().unbind())
}

/// `(spec, description)` for every zoo family.
#[pyfunction]
fn zoo_catalog() -> Vec<(&'static str, &'static str)> {
    numcore::ZOO_CATALOG.to_vec()
}

#[pymodule]
fn pyunitgrad(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyTolerances>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(brouwer_fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(resolvent_point, m)?)?;
    m.add_function(wrap_pyfunction!(limit_direction, m)?)?;
    m.add_function(wrap_pyfunction!(ray_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(ray_gradient_drift, m)?)?;
    m.add_function(wrap_pyfunction!(first_order_gap, m)?)?;
    m.add_function(wrap_pyfunction!(monotonicity_gap, m)?)?;
    m.add_function(wrap_pyfunction!(line_pair_witness, m)?)?;
    m.add_function(wrap_pyfunction!(closest_points_between_lines, m)?)?;
    m.add_function(wrap_pyfunction!(parabola_projection, m)?)?;
    m.add_function(wrap_pyfunction!(parabola_discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(parabola_cubic_residual, m)?)?;
    m.add_function(wrap_pyfunction!(classify_singularity, m)?)?;
    m.add_function(wrap_pyfunction!(project_to_graph, m)?)?;
    m.add_function(wrap_pyfunction!(distance_field, m)?)?;
    m.add_function(wrap_pyfunction!(emit_grid, m)?)?;
    m.add_function(wrap_pyfunction!(zoo_catalog, m)?)?;
    Ok(())
}
