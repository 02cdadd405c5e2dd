//! Python bindings: a `Model` class built from a JSON config plus the
//! transform, inversion, asymptotic and simulation routines.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ruinpool::config::ModelConfig;
use ruinpool::heavy_tail;
use ruinpool::inversion::{self, StehfestPlan};
use ruinpool::ladder;
use ruinpool::overshoot;
use ruinpool::phase_type;
use ruinpool::simulate::{simulate_paths, Horizon, SimOptions};
use ruinpool::ModelSpec;

create_exception!(ruinpool, RuinError, PyValueError);

fn err(e: ruinpool::RuinError) -> PyErr {
    RuinError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Pool model: major-client claim rates and laws plus small-client regimes.
#[pyclass(module = "ruinpool", frozen)]
struct Model {
    cfg: ModelConfig,
    spec: ModelSpec,
}

impl Model {
    fn beta(&self, beta: Option<f64>) -> PyResult<f64> {
        beta.or(self.cfg.beta)
            .ok_or_else(|| RuinError::new_err("beta is required (not set in the config)"))
    }

    fn plan(terms: usize) -> PyResult<StehfestPlan> {
        StehfestPlan::new(terms).map_err(err)
    }
}

#[pymethods]
impl Model {
    /// Builds a model from a JSON config string.
    #[new]
    fn new(config_json: &str) -> PyResult<Self> {
        let cfg = ModelConfig::from_json_str(config_json).map_err(err)?;
        let spec = cfg.build().map_err(err)?;
        Ok(Model { cfg, spec })
    }

    /// Loads a JSON or TOML config file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let cfg = ModelConfig::load(path).map_err(err)?;
        let spec = cfg.build().map_err(err)?;
        Ok(Model { cfg, spec })
    }

    #[getter]
    fn m(&self) -> usize {
        self.spec.m()
    }

    #[getter]
    fn lambda_circ(&self) -> Vec<f64> {
        self.spec.lambda_circ().to_vec()
    }

    #[getter]
    fn config_beta(&self) -> Option<f64> {
        self.cfg.beta
    }

    fn to_json(&self) -> String {
        self.cfg.to_json()
    }

    /// `E exp(-alpha Ybar(T_beta))` starting from `n` clients (default `m`).
    #[pyo3(signature = (alpha, beta=None, n=None))]
    fn pi(&self, alpha: f64, beta: Option<f64>, n: Option<usize>) -> PyResult<f64> {
        ladder::pi(&self.spec, self.beta(beta)?, n.unwrap_or(self.spec.m()), alpha).map_err(err)
    }

    /// `(1 - pi(alpha)) / alpha`.
    #[pyo3(signature = (alpha, beta=None))]
    fn ruin_transform(&self, alpha: f64, beta: Option<f64>) -> PyResult<f64> {
        ladder::ruin_transform(&self.spec, self.beta(beta)?, self.spec.m(), alpha).map_err(err)
    }

    /// Value and first two alpha-derivatives of `pi` at zero.
    #[pyo3(signature = (beta=None))]
    fn pi_jet(&self, beta: Option<f64>) -> PyResult<(f64, f64, f64)> {
        let j = ladder::pi_jet(&self.spec, self.beta(beta)?, self.spec.m()).map_err(err)?;
        Ok((j.v, j.d1, j.d2))
    }

    /// `pi` through the overshoot recursions (drift-only models).
    #[pyo3(signature = (alpha, beta=None))]
    fn pi_overshoot(&self, alpha: f64, beta: Option<f64>) -> PyResult<f64> {
        overshoot::pi_via_ladders(&self.spec, self.beta(beta)?, alpha).map_err(err)
    }

    #[pyo3(signature = (n, k, alpha, beta=None))]
    fn zeta(&self, n: usize, k: usize, alpha: f64, beta: Option<f64>) -> PyResult<f64> {
        overshoot::zeta(&self.spec, n, k, alpha, self.beta(beta)?).map_err(err)
    }

    #[pyo3(signature = (n, k, alpha, gamma, beta=None))]
    fn xi(&self, n: usize, k: usize, alpha: f64, gamma: f64, beta: Option<f64>) -> PyResult<f64> {
        overshoot::xi(&self.spec, n, k, alpha, self.beta(beta)?, gamma).map_err(err)
    }

    /// `P(Ybar(T_beta) > u)` on a grid, by Stehfest inversion.
    #[pyo3(signature = (u_grid, beta=None, terms=inversion::DEFAULT_TERMS))]
    fn ruin_curve(&self, u_grid: Vec<f64>, beta: Option<f64>, terms: usize) -> PyResult<Vec<f64>> {
        inversion::ruin_curve(&self.spec, self.beta(beta)?, &u_grid, &Self::plan(terms)?).map_err(err)
    }

    /// Mean and variance of `Ybar(t)` on a grid, as a dict of lists.
    #[pyo3(signature = (t_grid, terms=inversion::DEFAULT_TERMS))]
    fn moment_curves<'py>(&self, py: Python<'py>, t_grid: Vec<f64>, terms: usize) -> PyResult<Bound<'py, PyDict>> {
        let c = inversion::moment_curves(&self.spec, &t_grid, &Self::plan(terms)?).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("t", c.t)?;
        d.set_item("mean", c.mean)?;
        d.set_item("second", c.second)?;
        d.set_item("var", c.var)?;
        Ok(d)
    }

    /// Law of the number of claims before killing.
    #[pyo3(signature = (beta=None))]
    fn m_distribution(&self, beta: Option<f64>) -> PyResult<Vec<f64>> {
        heavy_tail::m_distribution(&self.spec, self.beta(beta)?).map_err(err)
    }

    #[pyo3(signature = (beta=None))]
    fn expected_claims(&self, beta: Option<f64>) -> PyResult<f64> {
        heavy_tail::expected_claims(&self.spec, self.beta(beta)?).map_err(err)
    }

    /// `E M * P(B > u)` for regularly varying claims.
    #[pyo3(signature = (u, beta=None))]
    fn rv_tail_approx(&self, u: f64, beta: Option<f64>) -> PyResult<f64> {
        heavy_tail::rv_tail_approx(&self.spec, self.beta(beta)?, u).map_err(err)
    }

    /// Exact tail of the phase-type running maximum on a grid.
    #[pyo3(signature = (u_grid, beta=None))]
    fn phase_type_tail(&self, u_grid: Vec<f64>, beta: Option<f64>) -> PyResult<Vec<f64>> {
        let ph = phase_type::running_max_ph(&self.spec, self.beta(beta)?, self.spec.m()).map_err(err)?;
        Ok(u_grid.iter().map(|u| ph.tail(*u)).collect())
    }

    /// Leading tail term `coeff * exp(-mu u) u^(mult-1)` of the phase-type
    /// running maximum.
    #[pyo3(signature = (beta=None))]
    fn spectral_tail<'py>(&self, py: Python<'py>, beta: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
        let m = self.spec.m();
        let ph = phase_type::running_max_ph(&self.spec, self.beta(beta)?, m).map_err(err)?;
        let d1 = self
            .spec
            .identical_claim()
            .map_err(err)?
            .dominant_multiplicity()
            .ok_or_else(|| RuinError::new_err("claim law has no phase-type form"))?;
        let st = phase_type::spectral_tail(&ph, m, d1).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("mu", st.mu)?;
        d.set_item("mult", st.mult)?;
        d.set_item("coeff", st.coeff)?;
        d.set_item("stable_from", st.stable_from)?;
        Ok(d)
    }

    /// Monte Carlo summary as a dict. With `times` the maxima are taken at
    /// fixed times, otherwise at an exponential time (or until the last
    /// claim when beta is 0).
    #[pyo3(signature = (n_paths, seed, u=Vec::new(), alpha=vec![1.0], beta=None, times=None, threads=None))]
    #[allow(clippy::too_many_arguments)]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        n_paths: usize,
        seed: u64,
        u: Vec<f64>,
        alpha: Vec<f64>,
        beta: Option<f64>,
        times: Option<Vec<f64>>,
        threads: Option<usize>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let horizon = match times {
            Some(times) => Horizon::Fixed { times },
            None => Horizon::from_beta(self.beta(beta)?).map_err(err)?,
        };
        let opts = SimOptions { n_paths, seed, levels: u, alphas: alpha, threads };
        let summary = py.detach(|| simulate_paths(&self.spec, &horizon, &opts)).map_err(err)?;
        let text = serde_json::to_string(&summary).map_err(|e| RuinError::new_err(e.to_string()))?;
        json_to_py(py, &text)
    }

    fn __repr__(&self) -> String {
        format!("Model(m={}, beta={:?})", self.spec.m(), self.cfg.beta)
    }
}

/// Stehfest inversion of a Python callable `f(s)` at `t`.
#[pyfunction]
#[pyo3(signature = (f, t, terms=inversion::DEFAULT_TERMS))]
fn stehfest_invert(f: &Bound<'_, PyAny>, t: f64, terms: usize) -> PyResult<f64> {
    let plan = StehfestPlan::new(terms).map_err(err)?;
    let mut failure = None;
    let out = plan.invert(
        |s| match f.call1((s,)).and_then(|v| v.extract::<f64>()) {
            Ok(v) => Ok(v),
            Err(e) => {
                failure = Some(e);
                Err(ruinpool::RuinError::EvaluationFailed("python callable raised".into()))
            }
        },
        t,
    );
    match (out, failure) {
        (_, Some(e)) => Err(e),
        (r, None) => r.map_err(err),
    }
}

#[pymodule]
#[pyo3(name = "ruinpool")]
fn ruinpool_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(stehfest_invert, m)?)?;
    m.add("RuinError", m.py().get_type::<RuinError>())?;
    Ok(())
}
