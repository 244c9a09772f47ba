//! Python bindings for `scenrisk`.
//!
//! Structured inputs (distortions, representations, Basel settings) are
//! passed as JSON strings in the same schema the command-line tool reads;
//! structured results come back as Python dicts.

use std::path::PathBuf;

use chrono::NaiveDate;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;
use scenrisk::axioms::{check_componentwise, check_standard, check_submodular, DEFAULT_GRID_K};
use scenrisk::basel::{BaselConfig, PortfolioPanel};
use scenrisk::choquet::{distorted_set_function, DistortionSpec, PsiFamily};
use scenrisk::market::{economic_scenarios, load_csv, load_series_csv, log_linear_detrend, negative_returns};
use scenrisk::representation::{rho_psi, PsiBarSpec};
use scenrisk::{NamedDistribution, RiskError};

create_exception!(scenrisk_py, ScenriskError, PyValueError, "Raised for any library error; args are (kind, message).");

fn err(e: RiskError) -> PyErr {
    ScenriskError::new_err((e.kind(), e.to_string()))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| err(RiskError::Parse(format!("{what}: {e}"))))
}

fn parse_date(s: &str) -> PyResult<NaiveDate> {
    NaiveDate::parse_from_str(s, scenrisk::market::DATE_FORMAT)
        .map_err(|e| err(RiskError::Parse(format!("date {s:?}: {e}"))))
}

/// Hands a serializable report to Python's `json.loads`.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(x).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "EmpiricalDistribution", module = "scenrisk_py")]
pub struct PyEmpirical {
    inner: scenrisk::EmpiricalDistribution,
}

#[pymethods]
impl PyEmpirical {
    /// Law of `values`, uniform unless `weights` are given (normalized).
    #[new]
    #[pyo3(signature = (values, weights=None))]
    fn new(values: Vec<f64>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let inner = scenrisk::EmpiricalDistribution::from_samples(&values, weights.as_deref()).map_err(err)?;
        Ok(PyEmpirical { inner })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn cdf(&self, x: f64) -> f64 {
        self.inner.cdf(x)
    }

    fn quantile(&self, t: f64) -> PyResult<f64> {
        self.inner.quantile(t).map_err(err)
    }

    fn var(&self, p: f64) -> PyResult<f64> {
        self.inner.var(p).map_err(err)
    }

    fn es(&self, p: f64) -> PyResult<f64> {
        self.inner.es(p).map_err(err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("distribution serializes")
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyEmpirical { inner: parse_json(text, "distribution")? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("EmpiricalDistribution(atoms={}, mean={})", self.inner.len(), self.inner.mean())
    }
}

#[pyclass(name = "ScenarioDistributions", module = "scenrisk_py")]
pub struct PySd {
    inner: scenrisk::ScenarioDistributions,
}

#[pymethods]
impl PySd {
    /// Scenario laws in order; names default to `Q1, Q2, ...`.
    #[new]
    #[pyo3(signature = (laws, names=None))]
    fn new(laws: Vec<PyRef<'_, PyEmpirical>>, names: Option<Vec<String>>) -> PyResult<Self> {
        let names = names.unwrap_or_else(|| (1..=laws.len()).map(|i| format!("Q{i}")).collect());
        if names.len() != laws.len() {
            return Err(err(RiskError::invalid(format!("{} laws but {} names", laws.len(), names.len()))));
        }
        let entries = laws
            .iter()
            .zip(names)
            .map(|(l, name)| NamedDistribution { name, distribution: l.inner.clone() })
            .collect();
        Ok(PySd { inner: scenrisk::ScenarioDistributions::new(entries).map_err(err)? })
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.entries().iter().map(|e| e.name.clone()).collect()
    }

    fn law(&self, i: usize) -> PyResult<PyEmpirical> {
        let e = self.inner.entries().get(i).ok_or_else(|| err(RiskError::NotFound(format!("scenario {i}"))))?;
        Ok(PyEmpirical { inner: e.distribution.clone() })
    }

    fn es_values(&self, p: f64) -> PyResult<Vec<f64>> {
        self.inner.es_values(p).map_err(err)
    }

    fn mes(&self, p: f64) -> PyResult<f64> {
        self.inner.mes(p).map_err(err)
    }

    fn mvar(&self, p: f64) -> PyResult<f64> {
        self.inner.mvar(p).map_err(err)
    }

    #[pyo3(signature = (p, weights=None))]
    fn aes(&self, p: f64, weights: Option<Vec<f64>>) -> PyResult<f64> {
        self.inner.aes(p, weights.as_deref()).map_err(err)
    }

    fn imes(&self, p: f64) -> PyResult<f64> {
        self.inner.imes(p).map_err(err)
    }

    fn rmes(&self, p: f64) -> PyResult<f64> {
        self.inner.rmes(p).map_err(err)
    }

    /// The representation integral for a `psibar` given as JSON, e.g.
    /// `{"form": "diagonal_uniform", "p": 0.9}`. Returns a dict with
    /// `value`, `std_error`, `method` and `samples`.
    #[pyo3(signature = (psibar_json, mc_samples=None, seed=0))]
    fn rho_psi<'py>(
        &self,
        py: Python<'py>,
        psibar_json: &str,
        mc_samples: Option<usize>,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let spec: PsiBarSpec = parse_json(psibar_json, "psibar")?;
        let r = rho_psi(&self.inner, &spec, mc_samples, seed).map_err(err)?;
        to_py(py, &r)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("distributions serialize")
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PySd { inner: parse_json(text, "scenario distributions")? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "ScenarioBundle", module = "scenrisk_py")]
pub struct PyBundle {
    inner: scenrisk::ScenarioBundle,
}

#[pymethods]
impl PyBundle {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: scenrisk::ScenarioBundle = parse_json(text, "bundle")?;
        inner.validate().map_err(err)?;
        Ok(PyBundle { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("bundle serializes")
    }

    #[getter]
    fn outcome_count(&self) -> usize {
        self.inner.table.outcome_count()
    }

    #[getter]
    fn variables(&self) -> Vec<String> {
        self.inner.table.variables().iter().map(|v| v.name.clone()).collect()
    }

    #[getter]
    fn scenario_names(&self) -> Vec<String> {
        self.inner.scenarios.scenarios().iter().map(|s| s.name.clone()).collect()
    }

    #[getter]
    fn mutually_singular(&self) -> bool {
        self.inner.scenarios.mutually_singular()
    }

    fn values(&self, variable: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.table.variable(variable).map_err(err)?.to_vec())
    }

    fn weights(&self, scenario: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.scenarios.scenario(scenario).map_err(err)?.weights.clone())
    }

    #[getter]
    fn base_weights(&self) -> Vec<f64> {
        self.inner.base_weights()
    }

    /// Regime labels 1..4 per window day, when built from market data.
    #[getter]
    fn labels(&self) -> Option<Vec<u8>> {
        self.inner.assignment.as_ref().map(|a| a.labels.clone())
    }

    #[pyo3(signature = (variable=None))]
    fn distributions(&self, variable: Option<&str>) -> PyResult<PySd> {
        Ok(PySd { inner: self.inner.distributions(variable).map_err(err)? })
    }

    #[pyo3(signature = (variable=None))]
    fn base_law(&self, variable: Option<&str>) -> PyResult<PyEmpirical> {
        Ok(PyEmpirical { inner: self.inner.base_law(variable).map_err(err)? })
    }
}

/// Economic scenarios from price CSVs (target and index) and a VIX level
/// CSV. The window is the `window` target return days before `t0`, or the
/// last `window` days when `t0` is omitted.
#[pyfunction]
#[pyo3(signature = (target, vix, index, window, t0=None, date_column="date", value_column="close"))]
fn build_scenarios(
    target: PathBuf,
    vix: PathBuf,
    index: PathBuf,
    window: usize,
    t0: Option<&str>,
    date_column: &str,
    value_column: &str,
) -> PyResult<PyBundle> {
    let x = load_csv(&target, date_column, value_column).and_then(|p| negative_returns(&p)).map_err(err)?;
    let v = load_series_csv(&vix, date_column, value_column).map_err(err)?;
    let r = load_csv(&index, date_column, value_column).and_then(|p| log_linear_detrend(&p)).map_err(err)?;
    let t0 = match t0 {
        Some(s) => parse_date(s)?,
        None => x.dates().last().and_then(|d| d.succ_opt()).ok_or_else(|| err(RiskError::invalid("no target returns")))?,
    };
    let es = economic_scenarios(&x, &v, &r, t0, window).map_err(err)?;
    Ok(PyBundle { inner: es.into() })
}

/// Componentwise grid checks of a distortion given as family JSON, e.g.
/// `{"family": "imes_type", "p": 0.5}`. With a bundle, the distorted set
/// function on its scenarios is also checked.
#[pyfunction]
#[pyo3(signature = (arity, family_json, bundle=None, grid_k=DEFAULT_GRID_K))]
fn check_axioms<'py>(
    py: Python<'py>,
    arity: usize,
    family_json: &str,
    bundle: Option<PyRef<'_, PyBundle>>,
    grid_k: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let family: PsiFamily = parse_json(family_json, "distortion")?;
    let psi = DistortionSpec::from_family(arity, family).map_err(err)?;
    let mut out = serde_json::Map::new();
    let rep = check_componentwise(&psi, grid_k).map_err(err)?;
    out.insert("psi_increasing".into(), rep.increasing.holds.into());
    out.insert("psi_concave".into(), rep.concave.holds.into());
    out.insert("psi_submodular".into(), rep.submodular.holds.into());
    out.insert("componentwise".into(), serde_json::to_value(&rep).expect("report serializes"));
    if let Some(b) = bundle {
        let sf = distorted_set_function(&psi, &b.inner.scenarios).map_err(err)?;
        let st = check_standard(&sf).map_err(err)?;
        let sm = check_submodular(&sf).map_err(err)?;
        out.insert("set_function_increasing".into(), st.holds.into());
        out.insert("set_function_submodular".into(), sm.holds.into());
        out.insert("standard".into(), serde_json::to_value(&st).expect("verdict serializes"));
        out.insert("submodular".into(), serde_json::to_value(&sm).expect("verdict serializes"));
    }
    to_py(py, &out)
}

#[pyclass(name = "PortfolioPanel", module = "scenrisk_py")]
pub struct PyPanel {
    inner: PortfolioPanel,
}

#[pymethods]
impl PyPanel {
    /// Loads `<dir>/<factor>.csv` for each factor with the given holdings.
    #[staticmethod]
    #[pyo3(signature = (dir, factors, units, date_column="date", value_column="close"))]
    fn from_csv_dir(dir: PathBuf, factors: Vec<String>, units: Vec<f64>, date_column: &str, value_column: &str) -> PyResult<Self> {
        let (inner, _) = PortfolioPanel::from_csv_dir(&dir, &factors, &units, date_column, value_column).map_err(err)?;
        Ok(PyPanel { inner })
    }

    #[getter]
    fn dates(&self) -> Vec<String> {
        self.inner.dates().iter().map(|d| d.to_string()).collect()
    }

    #[getter]
    fn factors(&self) -> Vec<String> {
        self.inner.factor_names().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// IMCC report; `config_json` holds Basel settings and may be `"{}"` for
    /// the defaults. `as_of` defaults to the last panel date.
    #[pyo3(signature = (config_json="{}", as_of=None))]
    fn imcc<'py>(&self, py: Python<'py>, config_json: &str, as_of: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let cfg: BaselConfig = parse_json(config_json, "basel config")?;
        let as_of = match as_of {
            Some(s) => parse_date(s)?,
            None => *self.inner.dates().last().ok_or_else(|| err(RiskError::invalid("empty panel")))?,
        };
        let r = py.detach(|| scenrisk::basel::imcc(&self.inner, &cfg, as_of)).map_err(err)?;
        to_py(py, &r)
    }

    /// Rolling full-portfolio ES and MES; failed dates carry an `error` key.
    #[pyo3(signature = (start, end, config_json="{}"))]
    fn rolling<'py>(&self, py: Python<'py>, start: &str, end: &str, config_json: &str) -> PyResult<Bound<'py, PyAny>> {
        let cfg: BaselConfig = parse_json(config_json, "basel config")?;
        let (from, to) = (parse_date(start)?, parse_date(end)?);
        let rows = py.detach(|| scenrisk::basel::rolling_series(&self.inner, &cfg, from, to)).map_err(err)?;
        let rows: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| {
                let mut v = match &r.values {
                    Ok(x) => serde_json::to_value(x).expect("row serializes"),
                    Err(e) => serde_json::json!({ "error": e }),
                };
                v["date"] = r.date.to_string().into();
                v
            })
            .collect();
        to_py(py, &rows)
    }
}

#[pymodule]
fn scenrisk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", scenrisk::VERSION)?;
    m.add("ScenriskError", m.py().get_type::<ScenriskError>())?;
    m.add_class::<PyEmpirical>()?;
    m.add_class::<PySd>()?;
    m.add_class::<PyBundle>()?;
    m.add_class::<PyPanel>()?;
    m.add_function(wrap_pyfunction!(build_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(check_axioms, m)?)?;
    Ok(())
}
