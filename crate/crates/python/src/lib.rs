//! Python bindings: a `Problem` class wrapping a parsed problem file,
//! plus the 3-CNF reduction helpers. Queries use the same grammar as
//! the command line ("a <= b", "a < b", and "a == b" for strong
//! deduction).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hclp_core::engine::{EngineRun, TieOrder};
use hclp_core::io::{
    parse_problem, parse_query, parse_strong_query, problem_to_json, FileConstraint,
    ParsedProblem,
};
use hclp_core::oracle::{self, ClassConstraint, ModelClassSpec};
use hclp_core::sat;
use hclp_core::semantics::{CostTable, PreferenceStatement};

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A preference problem: a cost table, statements, and the optional
/// model-class restriction from the file.
#[pyclass]
struct Problem {
    inner: ParsedProblem,
}

impl Problem {
    /// Table and statements the sequence engine reasons over (orderings
    /// merged, equivalence classes collapsed).
    fn view(&self) -> PyResult<(CostTable, Vec<PreferenceStatement>)> {
        self.inner.sequence_view().map_err(value_error)
    }

    fn spec(&self, max_level_size: Option<usize>, full_sigma: bool) -> ModelClassSpec {
        let constraint = match (max_level_size, &self.inner.constraint) {
            (Some(t), _) => ClassConstraint::LevelSizeAtMost(t),
            (None, Some(FileConstraint::MaxLevelSize(t))) => {
                ClassConstraint::LevelSizeAtMost(*t)
            }
            (None, Some(FileConstraint::Equivalence(p))) => {
                ClassConstraint::EquivalenceClasses(p.clone())
            }
            (None, None) => ClassConstraint::Unrestricted,
        };
        ModelClassSpec {
            constraint,
            require_full_sigma: full_sigma,
        }
    }
}

#[pymethods]
impl Problem {
    /// Parse a problem from its JSON text.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = parse_problem(text)
            .map_err(|e| PyValueError::new_err(format!("[{}] {e}", e.code())))?;
        Ok(Problem { inner })
    }

    /// Parse a problem from a file path.
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PyValueError::new_err(format!("reading {path}: {e}")))?;
        Self::from_json(&text)
    }

    /// The problem serialized back to its file form.
    fn to_json(&self) -> String {
        problem_to_json(&self.inner)
    }

    fn alternatives(&self) -> Vec<String> {
        self.inner.table.alternatives().to_vec()
    }

    fn evaluations(&self) -> Vec<String> {
        self.inner.table.evaluations().to_vec()
    }

    fn statements(&self) -> Vec<String> {
        self.inner
            .preferences
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    /// Exact cost of an alternative under an evaluation, as a decimal or
    /// "n/d" string.
    fn cost(&self, evaluation: &str, alternative: &str) -> PyResult<String> {
        let table = &self.inner.table;
        let e = table.eval_id(evaluation).map_err(value_error)?;
        let a = table.alt_id(alternative).map_err(value_error)?;
        Ok(table.cost(e, a).to_string())
    }

    /// Whether some sequence model satisfies every statement.
    fn is_consistent(&self) -> PyResult<bool> {
        let (table, gamma) = self.view()?;
        hclp_core::is_consistent(&table, &gamma).map_err(value_error)
    }

    /// The greedy sequence: always satisfies the non-strict closure,
    /// and the statements themselves when they are consistent.
    fn cons_check(&self) -> PyResult<Vec<String>> {
        let (table, gamma) = self.view()?;
        let run =
            EngineRun::compute(&table, &gamma, &TieOrder::declaration(&table)).map_err(value_error)?;
        Ok(run
            .sequence()
            .iter()
            .map(|&e| table.eval_name(e).to_string())
            .collect())
    }

    /// Whether the statements entail `query` ("a <= b" or "a < b") over
    /// sequence models.
    fn deduce(&self, query: &str) -> PyResult<bool> {
        let (table, gamma) = self.view()?;
        let query = parse_query(query).map_err(value_error)?;
        hclp_core::deduce(&table, &gamma, &query).map_err(value_error)
    }

    /// The maximal inconsistency base as (statements, evaluations).
    fn mib(&self) -> PyResult<(Vec<String>, Vec<String>)> {
        let (table, gamma) = self.view()?;
        let base = hclp_core::mib(&table, &gamma).map_err(value_error)?;
        Ok((
            base.gamma_part.iter().map(|s| s.to_string()).collect(),
            base.c_part,
        ))
    }

    /// A consistent repair: supported statements survive, the rest are
    /// weakened.
    fn repair(&self) -> PyResult<Vec<String>> {
        let (table, gamma) = self.view()?;
        Ok(hclp_core::repair(&table, &gamma)
            .map_err(value_error)?
            .iter()
            .map(|s| s.to_string())
            .collect())
    }

    /// Whether some sequence using every evaluation satisfies the
    /// statements.
    fn strong_is_consistent(&self) -> PyResult<bool> {
        let (table, gamma) = self.view()?;
        hclp_core::strong_is_consistent(&table, &gamma).map_err(value_error)
    }

    /// Entailment over full sequences; also accepts "a == b". Raises on
    /// inputs that are not strongly consistent.
    fn strong_deduce(&self, query: &str) -> PyResult<bool> {
        let (table, gamma) = self.view()?;
        let query = parse_strong_query(query).map_err(value_error)?;
        hclp_core::strong_deduce(&table, &gamma, &query).map_err(value_error)
    }

    /// Supporters, opposers, and indifferent evaluations of a query.
    fn classify(&self, query: &str) -> PyResult<(Vec<String>, Vec<String>, Vec<String>)> {
        let (table, _) = self.view()?;
        let query = parse_query(query).map_err(value_error)?;
        let c = hclp_core::classify(&table, &query).map_err(value_error)?;
        Ok((c.supp, c.opp, c.ind))
    }

    /// Entailment by exhaustive enumeration, honoring the file's model
    /// class unless `max_level_size` is given.
    #[pyo3(signature = (query, max_level_size=None, full_sigma=false, cap=None))]
    fn brute_deduce(
        &self,
        query: &str,
        max_level_size: Option<usize>,
        full_sigma: bool,
        cap: Option<usize>,
    ) -> PyResult<bool> {
        let (table, gamma) = self.inner.merged().map_err(value_error)?;
        let query = parse_query(query).map_err(value_error)?;
        let spec = self.spec(max_level_size, full_sigma);
        oracle::brute_deduce_with_cap(
            &table,
            &gamma,
            &query,
            &spec,
            cap.unwrap_or(oracle::DEFAULT_SIZE_CAP),
        )
        .map_err(value_error)
    }

    /// Number of models in the problem's model class.
    #[pyo3(signature = (max_level_size=None, full_sigma=false, cap=None))]
    fn count_models(
        &self,
        max_level_size: Option<usize>,
        full_sigma: bool,
        cap: Option<usize>,
    ) -> PyResult<u64> {
        let (table, _) = self.inner.merged().map_err(value_error)?;
        let spec = self.spec(max_level_size, full_sigma);
        oracle::count_models(&table, &spec, cap.unwrap_or(oracle::DEFAULT_SIZE_CAP))
            .map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem({} alternatives, {} evaluations, {} statements)",
            self.inner.table.alternative_count(),
            self.inner.table.evaluation_count(),
            self.inner.preferences.len() + self.inner.orderings.len(),
        )
    }
}

/// Build the entailment instance for a DIMACS 3-CNF formula and return
/// it as problem-file JSON (query: "alpha <= beta").
#[pyfunction]
fn reduce_3sat(dimacs: &str, t: usize) -> PyResult<String> {
    let cnf = sat::parse_dimacs(dimacs).map_err(value_error)?;
    let instance = sat::build_instance(&cnf, t).map_err(value_error)?;
    let problem = ParsedProblem {
        table: instance.table,
        preferences: instance.gamma,
        orderings: vec![],
        constraint: Some(FileConstraint::MaxLevelSize(t)),
    };
    Ok(problem_to_json(&problem))
}

/// Brute-force both sides of the reduction's biconditional; returns a
/// dict with keys "sat", "entailed", "agree".
#[pyfunction]
#[pyo3(signature = (dimacs, t, cap=None))]
fn verify_reduction(
    py: Python<'_>,
    dimacs: &str,
    t: usize,
    cap: Option<usize>,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let cnf = sat::parse_dimacs(dimacs).map_err(value_error)?;
    let report =
        sat::verify_reduction_with_cap(&cnf, t, cap.unwrap_or(oracle::DEFAULT_SIZE_CAP))
            .map_err(value_error)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("sat", report.sat)?;
    dict.set_item("entailed", report.entailed)?;
    dict.set_item("agree", report.agree)?;
    Ok(dict.unbind())
}

#[pymodule]
fn hclp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Problem>()?;
    m.add_function(wrap_pyfunction!(reduce_3sat, m)?)?;
    m.add_function(wrap_pyfunction!(verify_reduction, m)?)?;
    Ok(())
}
