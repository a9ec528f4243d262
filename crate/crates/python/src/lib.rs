//! Python module `efpf_kit`: EFPF evaluation, consistency audits,
//! cotransition laws, boundary scans and sampling.

use std::sync::Arc;

use efpf_core::boundary::{self, PathSpec};
use efpf_core::consistency::{self, TruncationPolicy};
use efpf_core::efpf::{
    self, BetaBernoulliParams, FeatureCounts as CoreCounts, Ibp2Params, Ibp3Params, VArray,
    WeightSystem,
};
use efpf_core::markov::{self, ChainLaw};
use efpf_core::numerics;
use efpf_core::sampler::{self, GrowthLaw, RngSpec};
use efpf_core::EfpfError as CoreError;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(
    efpf_kit,
    EfpfError,
    PyValueError,
    "Invalid parameters or arguments."
);
create_exception!(
    efpf_kit,
    ComputationError,
    PyRuntimeError,
    "A truncated sum did not converge or an enumeration is too large."
);

fn to_py(e: CoreError) -> PyErr {
    let msg = e.to_string();
    match e {
        CoreError::TruncationNotConverged { .. } | CoreError::Infeasible(_) => {
            ComputationError::new_err(msg)
        }
        _ => EfpfError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for efpf_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

/// Signed log-magnitude real.
#[pyclass(frozen, name = "LogReal", from_py_object)]
#[derive(Clone, Copy)]
struct PyLogReal(numerics::LogReal);

#[pymethods]
impl PyLogReal {
    #[new]
    fn new(x: f64) -> Self {
        PyLogReal(numerics::LogReal::from_f64(x))
    }

    #[staticmethod]
    fn from_log(log_mag: f64) -> Self {
        PyLogReal(numerics::LogReal::from_ln(log_mag))
    }

    #[getter]
    fn sign(&self) -> i8 {
        self.0.sign()
    }

    #[getter]
    fn log_mag(&self) -> f64 {
        self.0.log_mag()
    }

    fn __float__(&self) -> f64 {
        self.0.to_f64()
    }

    fn __mul__(&self, other: &PyLogReal) -> Self {
        PyLogReal(self.0 * other.0)
    }

    fn __truediv__(&self, other: &PyLogReal) -> Self {
        PyLogReal(self.0 / other.0)
    }

    fn __add__(&self, other: &PyLogReal) -> Self {
        PyLogReal(self.0 + other.0)
    }

    fn __sub__(&self, other: &PyLogReal) -> Self {
        PyLogReal(self.0 - other.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "LogReal(sign={}, log_mag={})",
            self.0.sign(),
            self.0.log_mag()
        )
    }
}

/// A feature allocation summary: `n` individuals and per-feature counts.
#[pyclass(frozen, name = "FeatureCounts", from_py_object)]
#[derive(Clone)]
struct PyFeatureCounts(CoreCounts);

#[pymethods]
impl PyFeatureCounts {
    #[new]
    fn new(n: u64, m: Vec<u64>) -> PyResult<Self> {
        Ok(PyFeatureCounts(CoreCounts::new(n, m).py()?))
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.n()
    }

    #[getter]
    fn k(&self) -> u64 {
        self.0.k()
    }

    #[getter]
    fn counts(&self) -> Vec<u64> {
        self.0.counts().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("FeatureCounts(n={}, m={:?})", self.0.n(), self.0.counts())
    }
}

#[derive(Clone, Copy)]
enum Law {
    Ibp3(Ibp3Params),
    Ibp2(Ibp2Params),
    Bb(BetaBernoulliParams),
}

/// A product-form feature model: three- or two-parameter buffet process,
/// or finite Beta-Bernoulli.
#[pyclass(frozen, name = "Model")]
struct PyModel(Law);

impl PyModel {
    fn v_array(&self) -> Arc<dyn VArray> {
        match self.0 {
            Law::Ibp3(p) => Arc::new(p),
            Law::Ibp2(p) => Arc::new(p),
            Law::Bb(p) => Arc::new(p),
        }
    }

    fn weights(&self) -> WeightSystem {
        match self.0 {
            Law::Ibp3(p) => WeightSystem::ibp3(p),
            Law::Ibp2(p) => WeightSystem::ibp3(p.as_ibp3()),
            Law::Bb(p) => WeightSystem::beta_bernoulli(p),
        }
    }

    fn at(&self) -> efpf::AlphaTheta {
        match self.0 {
            Law::Ibp3(p) => p.at,
            Law::Ibp2(p) => p.as_ibp3().at,
            Law::Bb(p) => p.at,
        }
    }

    fn chain(&self) -> PyResult<ChainLaw> {
        ChainLaw::new(self.v_array(), self.at()).py()
    }
}

fn policy(j_max: u64, tail_tol: f64) -> PyResult<TruncationPolicy> {
    TruncationPolicy::new(j_max, tail_tol).py()
}

#[pymethods]
impl PyModel {
    /// Three-parameter buffet process, `0 <= alpha < 1`.
    #[staticmethod]
    fn ibp3(gamma: f64, alpha: f64, theta: f64) -> PyResult<Self> {
        Ok(PyModel(Law::Ibp3(
            Ibp3Params::new(gamma, alpha, theta).py()?,
        )))
    }

    /// Two-parameter buffet process (`alpha = 0`).
    #[staticmethod]
    fn ibp2(gamma: f64, theta: f64) -> PyResult<Self> {
        Ok(PyModel(Law::Ibp2(Ibp2Params::new(gamma, theta).py()?)))
    }

    /// Beta-Bernoulli model over `n_features` features, `alpha < 0`.
    #[staticmethod]
    fn beta_bernoulli(n_features: u64, alpha: f64, theta: f64) -> PyResult<Self> {
        Ok(PyModel(Law::Bb(
            BetaBernoulliParams::new(n_features, alpha, theta).py()?,
        )))
    }

    #[getter]
    fn name(&self) -> &'static str {
        match self.0 {
            Law::Ibp3(_) => "ibp3",
            Law::Ibp2(_) => "ibp2",
            Law::Bb(_) => "bb",
        }
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.at().alpha
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.at().theta
    }

    /// Log EFPF at the counts.
    fn log_efpf(&self, fc: &PyFeatureCounts) -> f64 {
        let x = match &self.0 {
            Law::Ibp3(p) => efpf::efpf_ibp3(p, &fc.0),
            Law::Ibp2(p) => efpf::efpf_ibp3(&p.as_ibp3(), &fc.0),
            Law::Bb(p) => efpf::efpf_beta_bernoulli(p, &fc.0),
        };
        x.log_mag()
    }

    /// Log EFPF through the generic V, W, U product.
    fn log_efpf_product_form(&self, fc: &PyFeatureCounts) -> f64 {
        efpf::efpf_product_form(&self.weights(), &fc.0).log_mag()
    }

    fn v(&self, n: u64, k: u64) -> PyLogReal {
        PyLogReal(self.v_array().v(n, k))
    }

    #[pyo3(signature = (fc, j_max = 300, tail_tol = 1e-14))]
    fn consistency_residual(
        &self,
        fc: &PyFeatureCounts,
        j_max: u64,
        tail_tol: f64,
    ) -> PyResult<f64> {
        consistency::consistency_residual(&self.weights(), &fc.0, policy(j_max, tail_tol)?).py()
    }

    #[pyo3(signature = (n, k, j_max = 300, tail_tol = 1e-14))]
    fn recursion_residual(&self, n: u64, k: u64, j_max: u64, tail_tol: f64) -> PyResult<f64> {
        let v = self.v_array();
        consistency::v_recursion_residual(v.as_ref(), self.at(), n, k, policy(j_max, tail_tol)?)
            .py()
    }

    /// `P(K_n = k)`.
    fn marginal_kn(&self, n: u64, k: u64) -> PyResult<f64> {
        Ok(markov::marginal_kn(&self.chain()?, n, k).to_f64())
    }

    /// `P(K_{n+1} = k + j | K_n = k)`.
    fn transition_prob(&self, n: u64, k: u64, j: u64) -> PyResult<f64> {
        Ok(markov::transition_prob(&self.chain()?, n, k, j)
            .py()?
            .to_f64())
    }

    /// `P(K_n = k | K_m = l)` by enumerating chain paths.
    fn brute_force_cotransition(&self, n: u64, k: u64, m: u64, l: u64) -> PyResult<f64> {
        Ok(markov::brute_force_cotransition(&self.chain()?, n, k, m, l)
            .py()?
            .to_f64())
    }

    /// One allocation as a list of features, each the sorted list of the
    /// (1-based) individuals holding it.
    #[pyo3(signature = (n, seed = 0, stream = 0))]
    fn sample(&self, n: u64, seed: u64, stream: u64) -> PyResult<Vec<Vec<u64>>> {
        if n == 0 {
            return Err(EfpfError::new_err("domain error: n must be >= 1"));
        }
        let spec = RngSpec::new(seed, stream);
        let fm = match &self.0 {
            Law::Ibp3(p) => sampler::sample_ibp3(p, n, spec),
            Law::Ibp2(p) => sampler::sample_ibp3(&p.as_ibp3(), n, spec),
            Law::Bb(p) => sampler::sample_beta_bernoulli(p, n, spec),
        };
        Ok((0..fm.k())
            .map(|l| (1..=n).filter(|&i| fm.get(i, l)).collect())
            .collect())
    }

    /// Monte Carlo growth of `K_n`; a dict with the summary statistics.
    #[pyo3(signature = (n_max, runs, seed = 0, stream = 0))]
    fn growth_law<'py>(
        &self,
        py: Python<'py>,
        n_max: u64,
        runs: u64,
        seed: u64,
        stream: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let law = match self.0 {
            Law::Ibp3(p) => GrowthLaw::Ibp3(p),
            Law::Ibp2(p) => GrowthLaw::Ibp2(p),
            Law::Bb(p) => GrowthLaw::BetaBernoulli(p),
        };
        let rep = py
            .detach(|| sampler::growth_law_check(law, n_max, runs, RngSpec::new(seed, stream)))
            .py()?;
        let d = PyDict::new(py);
        d.set_item("statistic", &rep.statistic)?;
        d.set_item("target", rep.target)?;
        d.set_item("n_max", rep.n_max)?;
        d.set_item("runs", rep.runs)?;
        d.set_item("checkpoints", rep.checkpoints.clone())?;
        d.set_item("median_trajectory", rep.median_trajectory.clone())?;
        d.set_item("mean", rep.mean)?;
        d.set_item("median", rep.median)?;
        d.set_item("q1", rep.q1)?;
        d.set_item("q3", rep.q3)?;
        d.set_item("median_rel_gap", rep.median_relative_gap())?;
        d.set_item("absorbed_fraction", rep.absorbed_fraction)?;
        d.set_item("final_values", rep.final_values)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        match self.0 {
            Law::Ibp3(p) => format!(
                "Model.ibp3(gamma={}, alpha={}, theta={})",
                p.gamma, p.at.alpha, p.at.theta
            ),
            Law::Ibp2(p) => format!("Model.ibp2(gamma={}, theta={})", p.gamma, p.theta),
            Law::Bb(p) => format!(
                "Model.beta_bernoulli(n_features={}, alpha={}, theta={})",
                p.n_features, p.at.alpha, p.at.theta
            ),
        }
    }
}

#[pyfunction]
fn log_gamma(x: f64) -> PyResult<f64> {
    numerics::log_gamma(x).py()
}

#[pyfunction]
#[pyo3(signature = (x, m, tau = 1.0))]
fn rising_factorial(x: f64, m: u64, tau: f64) -> PyLogReal {
    PyLogReal(numerics::rising_factorial(x, m, tau))
}

/// `P(K_n = k | K_m = l)` in closed form; the same for every V.
#[pyfunction]
fn cotransition_prob(alpha: f64, theta: f64, n: u64, k: u64, m: u64, l: u64) -> PyResult<f64> {
    let at = efpf::AlphaTheta::new(alpha, theta).py()?;
    Ok(markov::cotransition_prob(at, n, k, m, l).py()?.to_f64())
}

#[pyfunction]
fn hypergeometric_identity_gap(alpha: f64, theta: f64, n: u64, m: u64) -> PyResult<f64> {
    markov::hypergeometric_identity_gap(efpf::AlphaTheta::new(alpha, theta).py()?, n, m).py()
}

#[pyfunction]
fn harmonic_identity_gap(theta: f64, n: u64, m: u64) -> PyResult<f64> {
    markov::harmonic_identity_gap(theta, n, m).py()
}

/// Path of `omega_m` by name: `power` (param c), `log` (param gamma),
/// `constant` (param N), or the superlinear `linear` and `sqrt`.
fn path_spec(path: &str, param: Option<f64>) -> PyResult<PathSpec> {
    let need = || {
        param.ok_or_else(|| {
            EfpfError::new_err(format!("domain error: path {path} needs a parameter"))
        })
    };
    Ok(match path {
        "power" => PathSpec::Power { c: need()? },
        "log" => PathSpec::Logarithmic { gamma: need()? },
        "constant" => {
            let n = need()?;
            if !(n >= 0.0 && n.fract() == 0.0) {
                return Err(EfpfError::new_err(
                    "domain error: constant path needs a whole N",
                ));
            }
            PathSpec::Constant { n: n as u64 }
        }
        "linear" => PathSpec::superlinear(|m| m),
        "sqrt" => PathSpec::superlinear(|m| ((m as f64).sqrt() + 0.5).floor() as u64),
        other => {
            return Err(EfpfError::new_err(format!(
                "domain error: unknown path {other:?}"
            )))
        }
    })
}

/// Cotransition ratio along a path and its limit; a dict with `m_grid`,
/// `omega`, `ratio`, `gaps`, `target` and `final_gap`.
#[pyfunction]
#[pyo3(signature = (alpha, theta, n, k, path, param = None, m_grid = None))]
#[allow(clippy::too_many_arguments)]
fn limit_scan<'py>(
    py: Python<'py>,
    alpha: f64,
    theta: f64,
    n: u64,
    k: u64,
    path: &str,
    param: Option<f64>,
    m_grid: Option<Vec<u64>>,
) -> PyResult<Bound<'py, PyDict>> {
    let at = efpf::AlphaTheta::new(alpha, theta).py()?;
    let spec = path_spec(path, param)?;
    let grid = m_grid.unwrap_or_else(|| vec![100, 1_000, 10_000, 100_000, 1_000_000]);
    let rep = py
        .detach(|| match spec {
            PathSpec::Superlinear(_) => boundary::divergence_scan(at, n, k, &spec, &grid),
            _ => boundary::limit_scan(at, n, k, &spec, &grid),
        })
        .py()?;
    let d = PyDict::new(py);
    d.set_item("m_grid", rep.m_grid.clone())?;
    d.set_item("omega", rep.omega.clone())?;
    d.set_item("ratio", rep.ratio_values.clone())?;
    d.set_item("gaps", rep.gaps.clone())?;
    d.set_item("target", rep.target)?;
    d.set_item("final_gap", rep.final_gap)?;
    d.set_item("tail_gaps_decreasing", rep.tail_gaps_decreasing(3))?;
    Ok(d)
}

#[pymodule]
fn efpf_kit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("EfpfError", py.get_type::<EfpfError>())?;
    m.add("ComputationError", py.get_type::<ComputationError>())?;
    m.add_class::<PyLogReal>()?;
    m.add_class::<PyFeatureCounts>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(rising_factorial, m)?)?;
    m.add_function(wrap_pyfunction!(cotransition_prob, m)?)?;
    m.add_function(wrap_pyfunction!(hypergeometric_identity_gap, m)?)?;
    m.add_function(wrap_pyfunction!(harmonic_identity_gap, m)?)?;
    m.add_function(wrap_pyfunction!(limit_scan, m)?)?;
    Ok(())
}
