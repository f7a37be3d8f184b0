//! Python bindings. Terms are immutable objects; sums come back as lists of
//! `(term, multiplicity)` pairs and paths as lists of public tags.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use rescalc::machine::{self, MachineConfig, Outcome, Policy};
use rescalc::reduction::{self, Mode, Order, Pick, Strategy, TraceRecord};
use rescalc::standardization::{self, DEFAULT_SLACK};
use rescalc::subst::classical_subst_sum;
use rescalc::{Bag, Canonical, Name, Path, Sum};

fn err(e: rescalc::Error) -> PyErr {
    match e {
        rescalc::Error::Parse(p) => PyValueError::new_err(p.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_err(e: rescalc::ParseError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A resource term, compared up to alpha-equivalence.
#[pyclass(frozen, from_py_object, module = "rescalc", name = "Term")]
#[derive(Clone)]
struct PyTerm {
    t: rescalc::Term,
}

fn wrap(t: rescalc::Term) -> PyTerm {
    PyTerm { t }
}

fn sum_out(s: &Sum<rescalc::Term>) -> Vec<(PyTerm, usize)> {
    s.iter().map(|(t, n)| (wrap(t.clone()), n)).collect()
}

fn path_in(t: &rescalc::Term, tags: &[String]) -> PyResult<Path> {
    Path::from_public(tags, t).map_err(err)
}

fn parse_bag(src: &str) -> PyResult<Bag> {
    match rescalc::parse_term(&format!("z{src}")).map_err(parse_err)? {
        rescalc::Term::App(f, p, _) if matches!(*f, rescalc::Term::Var(_)) => Ok(p),
        _ => Err(PyValueError::new_err(format!("not a single bag: {src}"))),
    }
}

fn mode_in(mode: &str) -> PyResult<Mode> {
    match mode {
        "baby" => Ok(Mode::Baby),
        "giant" => Ok(Mode::Giant),
        "nd" => Ok(Mode::Nd),
        _ => Err(PyValueError::new_err(format!("unknown mode {mode:?}"))),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_u64() {
            Some(u) => u.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(xs) => {
            let l = PyList::empty(py);
            for x in xs {
                l.append(json_to_py(py, x)?)?;
            }
            l.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

#[pymethods]
impl PyTerm {
    #[new]
    fn new(src: &str) -> PyResult<Self> {
        rescalc::parse_term(src).map(wrap).map_err(parse_err)
    }

    fn __str__(&self) -> String {
        rescalc::print_term(&self.t)
    }

    fn __repr__(&self) -> String {
        format!("Term({:?})", rescalc::print_term(&self.t))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.t.canonical() == other.t.canonical()
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.t.canonical().as_str().hash(&mut h);
        h.finish()
    }

    /// Printed form with canonical binder names and element order.
    fn canonical(&self) -> String {
        rescalc::print_canonical(&self.t)
    }

    #[getter]
    fn size(&self) -> usize {
        self.t.size()
    }

    fn free_vars(&self) -> Vec<String> {
        self.t.free_vars().iter().map(|n| n.as_str().to_string()).collect()
    }

    /// Outer normal form: no redex outside reusable elements.
    fn is_onf(&self) -> bool {
        machine::is_onf(&self.t)
    }

    /// Redexes as dicts with `path`, `rule`, `outer` and `leftmost`.
    fn redexes<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let mut out = Vec::new();
        for r in reduction::find_redexes(&self.t) {
            let d = PyDict::new(py);
            d.set_item("path", r.path.to_public(&self.t).map_err(err)?)?;
            d.set_item("rule", to_py(py, &r.rule)?)?;
            d.set_item("outer", r.outer)?;
            d.set_item("leftmost", r.leftmost)?;
            out.push(d);
        }
        Ok(out)
    }

    /// Public paths of the leftmost redexes.
    fn leftmost(&self) -> PyResult<Vec<Vec<String>>> {
        reduction::leftmost_set(&self.t).iter().map(|p| p.to_public(&self.t).map_err(err)).collect()
    }

    fn subterm(&self, path: Vec<String>) -> PyResult<PyTerm> {
        let p = path_in(&self.t, &path)?;
        p.follow(&self.t).map(|s| wrap(s.clone())).map_err(err)
    }
}

/// A reduction trace.
#[pyclass(frozen, module = "rescalc", name = "Trace")]
struct PyTrace {
    t: reduction::Trace,
}

#[pymethods]
impl PyTrace {
    fn __len__(&self) -> usize {
        self.t.len()
    }

    fn __repr__(&self) -> String {
        format!("<Trace of {} steps, {}>", self.t.len(), self.end())
    }

    /// How the trace stopped: normal, outer-normal, crashed,
    /// budget-exhausted or completed.
    #[getter]
    fn end(&self) -> String {
        serde_json::to_value(self.t.end).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
    }

    /// States as lists of `(term, multiplicity)` pairs.
    fn states(&self) -> Vec<Vec<(PyTerm, usize)>> {
        self.t.states().iter().map(sum_out).collect()
    }

    /// Terms of an nd trace.
    fn terms(&self) -> PyResult<Vec<PyTerm>> {
        Ok(self.t.terms().map_err(err)?.into_iter().map(wrap).collect())
    }

    /// Public paths of the fired redexes.
    fn paths(&self) -> PyResult<Vec<Vec<String>>> {
        self.t.steps.iter().map(|s| s.redex.path.to_public(&s.before).map_err(err)).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.t.to_record()).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn from_json(src: &str) -> PyResult<PyTrace> {
        let rec: TraceRecord = serde_json::from_str(src).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyTrace { t: reduction::Trace::from_record(&rec).map_err(err)? })
    }

    /// `(standard, violation)`, the violation a dict or `None`.
    fn is_standard<'py>(&self, py: Python<'py>) -> PyResult<(bool, Bound<'py, PyAny>)> {
        let rep = standardization::is_standard(&self.t).map_err(err)?;
        Ok((rep.standard, to_py(py, &rep.violation)?))
    }

    /// A standard nd trace with the same endpoints.
    fn standardize(&self) -> PyResult<PyTrace> {
        Ok(PyTrace { t: standardization::standardize_trace(&self.t, DEFAULT_SLACK).map_err(err)? })
    }
}

#[pyfunction]
fn parse(src: &str) -> PyResult<PyTerm> {
    PyTerm::new(src)
}

/// Parses a sum `M1 + ... + Mk`; `0` is the empty sum.
#[pyfunction]
fn parse_sum(src: &str) -> PyResult<Vec<(PyTerm, usize)>> {
    Ok(sum_out(&rescalc::parse_sum(src).map_err(parse_err)?))
}

/// Translates a pure lambda term (`M N` application) into the calculus.
#[pyfunction]
fn translate(src: &str) -> PyResult<PyTerm> {
    Ok(wrap(rescalc::from_lambda(&rescalc::parse_lambda(src).map_err(parse_err)?)))
}

#[pyfunction]
fn alpha_eq(a: &PyTerm, b: &PyTerm) -> bool {
    a.__eq__(b)
}

#[pyfunction]
fn linear_subst(t: &PyTerm, x: &str, n: &PyTerm) -> Vec<(PyTerm, usize)> {
    sum_out(&rescalc::linear_subst(&t.t, &Name::new(x), &n.t))
}

#[pyfunction]
fn partial_subst(t: &PyTerm, x: &str, n: &PyTerm) -> Vec<(PyTerm, usize)> {
    sum_out(&rescalc::partial_subst(&t.t, &Name::new(x), &n.t))
}

/// Classical substitution of a sum, given as a list of terms.
#[pyfunction]
fn classical_subst(t: &PyTerm, x: &str, n: Vec<PyTerm>) -> Vec<(PyTerm, usize)> {
    let mut s = Sum::zero();
    for m in n {
        s.add(m.t);
    }
    sum_out(&classical_subst_sum(&Sum::single(t.t.clone()), &Name::new(x), &s))
}

/// Substitution of a whole bag, written `[N1, !N2, ...]`.
#[pyfunction]
fn bag_subst(t: &PyTerm, x: &str, bag: &str) -> PyResult<Vec<(PyTerm, usize)>> {
    let p = parse_bag(bag)?;
    Ok(sum_out(&rescalc::bag_subst(&t.t, &Name::new(x), &p).map_err(err)?))
}

#[pyfunction]
fn giant_step(t: &PyTerm, path: Vec<String>) -> PyResult<Vec<(PyTerm, usize)>> {
    let p = path_in(&t.t, &path)?;
    Ok(sum_out(&reduction::giant_step(&t.t, &p).map_err(err)?))
}

/// The baby rule that applies and its result.
#[pyfunction]
fn baby_step<'py>(
    py: Python<'py>,
    t: &PyTerm,
    path: Vec<String>,
) -> PyResult<(Bound<'py, PyAny>, Vec<(PyTerm, usize)>)> {
    let p = path_in(&t.t, &path)?;
    let (rule, s) = reduction::baby_step(&t.t, &p).map_err(err)?;
    Ok((to_py(py, &rule)?, sum_out(&s)))
}

#[pyfunction]
fn nd_step(t: &PyTerm, path: Vec<String>) -> PyResult<Vec<PyTerm>> {
    let p = path_in(&t.t, &path)?;
    Ok(reduction::nd_step(&t.t, &p).map_err(err)?.into_iter().map(wrap).collect())
}

/// Every one-step nd successor as a `(path, term)` pair.
#[pyfunction]
fn nd_successors(t: &PyTerm) -> PyResult<Vec<(Vec<String>, PyTerm)>> {
    reduction::nd_successors(&t.t)
        .into_iter()
        .map(|s| Ok((s.redex.path.to_public(&t.t).map_err(err)?, wrap(s.term))))
        .collect()
}

/// Compares two redex positions: `"before"`, `"after"` or `"incomparable"`.
#[pyfunction]
fn precedes(t: &PyTerm, p1: Vec<String>, p2: Vec<String>) -> PyResult<&'static str> {
    let (a, b) = (path_in(&t.t, &p1)?, path_in(&t.t, &p2)?);
    Ok(match reduction::precedes(&a, &b, &t.t).map_err(err)? {
        Order::Before => "before",
        Order::After => "after",
        Order::Incomparable => "incomparable",
    })
}

/// Runs a reduction strategy. `pick` is `"leftmost"` or `"all"`.
#[pyfunction]
#[pyo3(signature = (t, mode="nd", pick="leftmost", steps=100))]
fn reduce(t: &PyTerm, mode: &str, pick: &str, steps: usize) -> PyResult<Vec<PyTrace>> {
    let pick = match pick {
        "leftmost" => Pick::LeftmostFirst,
        "all" => Pick::Exhaustive,
        _ => return Err(PyValueError::new_err(format!("unknown pick {pick:?}"))),
    };
    let traces = reduction::run_term(&t.t, &Strategy::new(mode_in(mode)?, pick), steps).map_err(err)?;
    Ok(traces.into_iter().map(|t| PyTrace { t }).collect())
}

/// A standard nd chain from `m` to `n`, searched up to `budget` steps.
#[pyfunction]
#[pyo3(signature = (m, n, budget=8))]
fn standardize(m: &PyTerm, n: &PyTerm, budget: usize) -> PyResult<PyTrace> {
    Ok(PyTrace { t: standardization::standardize(&m.t, &n.t, budget).map_err(err)? })
}

/// Runs the ND machine. `policy` is `"canonical"`, `"random"` or `"all"`.
/// Returns one dict per outcome, with `status` and, when converged,
/// `result` and the derivation `tree`.
#[pyfunction]
#[pyo3(signature = (t, policy="canonical", seed=0, budget=machine::DEFAULT_BUDGET))]
fn run_machine<'py>(
    py: Python<'py>,
    t: &PyTerm,
    policy: &str,
    seed: u64,
    budget: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let policy = match policy {
        "canonical" => Policy::CanonicalFirst,
        "random" => Policy::SeededRandom(seed),
        "all" => Policy::EnumerateAll,
        _ => return Err(PyValueError::new_err(format!("unknown policy {policy:?}"))),
    };
    let run = py.detach(|| machine::machine_step_run(&t.t, &MachineConfig::new(policy, budget)));
    let mut out = Vec::new();
    for o in &run.outcomes {
        let d = PyDict::new(py);
        match o {
            Outcome::Converged { result, tree } => {
                d.set_item("status", "converged")?;
                d.set_item("result", wrap(result.clone()))?;
                d.set_item("tree", to_py(py, &tree.to_record())?)?;
            }
            Outcome::Undefined { stuck } => {
                d.set_item("status", "undefined")?;
                d.set_item("stuck", rescalc::print_expression(stuck))?;
            }
            Outcome::BudgetExhausted => d.set_item("status", "budget-exhausted")?,
        }
        out.push(d);
    }
    Ok(out)
}

/// May-solvability verdict as a dict tagged by `status`.
#[pyfunction]
#[pyo3(signature = (t, budget=machine::DEFAULT_BUDGET))]
fn may_solvable<'py>(py: Python<'py>, t: &PyTerm, budget: usize) -> PyResult<Bound<'py, PyAny>> {
    let v = py.detach(|| machine::may_solvable(&t.t, budget));
    to_py(py, &v)
}

#[pymodule(name = "rescalc")]
fn rescalc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTerm>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(parse_sum, m)?)?;
    m.add_function(wrap_pyfunction!(translate, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_eq, m)?)?;
    m.add_function(wrap_pyfunction!(linear_subst, m)?)?;
    m.add_function(wrap_pyfunction!(partial_subst, m)?)?;
    m.add_function(wrap_pyfunction!(classical_subst, m)?)?;
    m.add_function(wrap_pyfunction!(bag_subst, m)?)?;
    m.add_function(wrap_pyfunction!(giant_step, m)?)?;
    m.add_function(wrap_pyfunction!(baby_step, m)?)?;
    m.add_function(wrap_pyfunction!(nd_step, m)?)?;
    m.add_function(wrap_pyfunction!(nd_successors, m)?)?;
    m.add_function(wrap_pyfunction!(precedes, m)?)?;
    m.add_function(wrap_pyfunction!(reduce, m)?)?;
    m.add_function(wrap_pyfunction!(standardize, m)?)?;
    m.add_function(wrap_pyfunction!(run_machine, m)?)?;
    m.add_function(wrap_pyfunction!(may_solvable, m)?)?;
    Ok(())
}
