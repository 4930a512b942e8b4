//! Python bindings for the jacobi-gap crate.
//!
//! The surface mirrors the CLI: construct a `Params`, then ask it for a
//! series solution, an integrator run, a two-method comparison, a glued
//! full-interval grid, or Monte Carlo samples. Grids come back as a
//! `SolutionGrid` with rows in the same `(theta, phi, t, E, nu)` column
//! order the CLI prints.
//!
//! Exact parameter entry matters for the series method, so the constructor
//! keeps strings and ints rational and only falls back to floats when a
//! float is actually passed.

use num_traits::ToPrimitive;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;

use jacobi_gap::harness::{self, ComparisonReport, OverlapPolicy};
use jacobi_gap::mc_oracle::{self, McConfig};
use jacobi_gap::ode_solver::{self, OdeConfig, RkSolution, RkStatus};
use jacobi_gap::series_solver::{self, SeriesSolution};
use jacobi_gap::{params, EnsembleParams, SolutionGrid};

fn to_py_err(e: jacobi_gap::Error) -> PyErr {
    use jacobi_gap::Error::*;
    match e {
        Domain(_) => PyValueError::new_err(e.to_string()),
        Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// One constructor argument: strings and ints stay exact, floats do not.
enum Arg {
    Exact(String),
    Float(f64),
}

fn classify(v: &Bound<'_, PyAny>) -> PyResult<Arg> {
    if let Ok(s) = v.extract::<String>() {
        return Ok(Arg::Exact(s));
    }
    if let Ok(i) = v.extract::<i64>() {
        return Ok(Arg::Exact(i.to_string()));
    }
    if let Ok(f) = v.extract::<f64>() {
        return Ok(Arg::Float(f));
    }
    Err(PyTypeError::new_err(
        "parameters must be str (\"p/q\" or decimal), int, or float",
    ))
}

impl Arg {
    fn as_f64(&self) -> PyResult<f64> {
        match self {
            Arg::Float(f) => Ok(*f),
            Arg::Exact(s) => params::parse_rational(s)
                .map_err(to_py_err)?
                .to_f64()
                .ok_or_else(|| PyValueError::new_err("parameter out of f64 range")),
        }
    }
}

/// Ensemble parameters `(a, b, N)`.
#[pyclass(frozen, name = "Params", module = "jacobi_gap")]
struct PyParams {
    inner: EnsembleParams,
}

#[pymethods]
impl PyParams {
    #[new]
    fn new(a: &Bound<'_, PyAny>, b: &Bound<'_, PyAny>, n: &Bound<'_, PyAny>) -> PyResult<Self> {
        let (a, b, n) = (classify(a)?, classify(b)?, classify(n)?);
        let inner = match (&a, &b, &n) {
            (Arg::Exact(pa), Arg::Exact(pb), Arg::Exact(pn)) => {
                EnsembleParams::parse(pa, pb, pn)
            }
            _ => EnsembleParams::from_f64(a.as_f64()?, b.as_f64()?, n.as_f64()?),
        }
        .map_err(to_py_err)?;
        Ok(PyParams { inner })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn n(&self) -> f64 {
        self.inner.n
    }

    /// Whether the instance carries exact rationals (required by the
    /// series method).
    #[getter]
    fn is_exact(&self) -> bool {
        self.inner.rational_mode()
    }

    fn __repr__(&self) -> String {
        format!(
            "Params(a={}, b={}, N={})",
            self.inner.a, self.inner.b, self.inner.n
        )
    }

    /// Power-series solution about `t = 0`. Without `degree` the tiered
    /// default for this `N` applies.
    #[pyo3(signature = (degree=None))]
    fn solve_series(&self, degree: Option<usize>) -> PyResult<PySeries> {
        let degree = self.pick_degree(degree)?;
        let inner = SeriesSolution::solve(&self.inner, degree).map_err(to_py_err)?;
        Ok(PySeries { inner })
    }

    /// Adaptive Runge-Kutta run from `t0 = 1 - eps` down to `t_end`.
    #[pyo3(signature = (eps=1e-7, reltol=1e-5, abstol=1e-6, t_end=0.01))]
    fn solve_rk(&self, eps: f64, reltol: f64, abstol: f64, t_end: f64) -> PyResult<PyRk> {
        let cfg = OdeConfig {
            eps,
            reltol,
            abstol,
            t_end,
            ..OdeConfig::default()
        };
        let inner = ode_solver::integrate(&self.inner, &cfg).map_err(to_py_err)?;
        Ok(PyRk { inner })
    }

    /// Run both methods and compare them on the overlap window.
    #[pyo3(signature = (degree=None, threshold=None))]
    fn compare(&self, degree: Option<usize>, threshold: Option<f64>) -> PyResult<PyReport> {
        let degree = self.pick_degree(degree)?;
        let mut policy = OverlapPolicy::default();
        if let Some(th) = threshold {
            policy.threshold = th;
        }
        let inner = harness::compare(&self.inner, &OdeConfig::default(), degree, &policy)
            .map_err(to_py_err)?;
        Ok(PyReport { inner })
    }

    /// Glued full-interval density grid.
    #[pyo3(signature = (degree=None, points=None))]
    fn glue(&self, degree: Option<usize>, points: Option<usize>) -> PyResult<PyGrid> {
        let degree = self.pick_degree(degree)?;
        let points =
            points.unwrap_or_else(|| (400.0 * self.inner.n).round() as usize + 1);
        let inner = harness::glue(&self.inner, &OdeConfig::default(), degree, points)
            .map_err(to_py_err)?;
        Ok(PyGrid { inner })
    }

    /// Accepted eigenphase tuples from the rejection sampler.
    #[pyo3(signature = (samples=10_000, seed=0x6a61636f62))]
    fn sample_levels(&self, samples: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let cfg = McConfig {
            samples,
            seed,
            ..McConfig::default()
        };
        Ok(mc_oracle::sample_levels(&self.inner, &cfg)
            .map_err(to_py_err)?
            .tuples)
    }

    /// Empirical CDF of the smallest eigenphase at each `phi`; estimates
    /// `1 - E_N(phi)`.
    #[pyo3(signature = (phis, samples=200_000, seed=0x6a61636f62))]
    fn mc_cdf(&self, phis: Vec<f64>, samples: usize, seed: u64) -> PyResult<Vec<f64>> {
        let cfg = McConfig {
            samples,
            seed,
            ..McConfig::default()
        };
        mc_oracle::empirical_first_cdf(&self.inner, &cfg, &phis).map_err(to_py_err)
    }
}

impl PyParams {
    fn pick_degree(&self, degree: Option<usize>) -> PyResult<usize> {
        degree
            .or_else(|| series_solver::default_degree(self.inner.n))
            .ok_or_else(|| {
                PyValueError::new_err("no default series degree for this N; pass degree=")
            })
    }
}

/// Truncated power-series solution.
#[pyclass(frozen, name = "SeriesSolution", module = "jacobi_gap")]
struct PySeries {
    inner: SeriesSolution,
}

#[pymethods]
impl PySeries {
    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree
    }

    /// Gap probability `E_N(phi)`.
    fn e(&self, phi: f64) -> PyResult<f64> {
        self.inner.e(phi).map_err(to_py_err)
    }

    /// First-eigenphase density `nu_N(phi)`.
    fn nu(&self, phi: f64) -> PyResult<f64> {
        self.inner.nu(phi).map_err(to_py_err)
    }

    fn nu_at_zero(&self) -> PyResult<f64> {
        self.inner.nu_at_zero().map_err(to_py_err)
    }

    /// Rational Taylor coefficient of `F` at order `k`, as a `p/q` string.
    fn f_coefficient(&self, k: usize) -> String {
        self.inner.f_coefficient(k).to_string()
    }

    fn grid(&self, points: usize) -> PyResult<PyGrid> {
        Ok(PyGrid {
            inner: self.inner.density_grid(points).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("SeriesSolution(degree={})", self.inner.degree)
    }
}

/// Dense-output integrator run.
#[pyclass(frozen, name = "RkSolution", module = "jacobi_gap")]
struct PyRk {
    inner: RkSolution,
}

#[pymethods]
impl PyRk {
    /// "ok", "warned", or "failed".
    #[getter]
    fn status(&self) -> &'static str {
        self.inner.status.as_str()
    }

    #[getter]
    fn detail(&self) -> Option<String> {
        match &self.inner.status {
            RkStatus::Ok => None,
            RkStatus::Warned(d) | RkStatus::Failed(d) => Some(d.clone()),
        }
    }

    /// Covered `t` interval, low end first.
    #[getter]
    fn t_span(&self) -> (f64, f64) {
        self.inner.t_span
    }

    #[getter]
    fn naccepted(&self) -> usize {
        self.inner.naccepted
    }

    #[getter]
    fn nfev(&self) -> usize {
        self.inner.nfev
    }

    /// `E_N` at `t`, or `None` outside the covered span.
    fn e_at(&self, t: f64) -> Option<f64> {
        self.inner.e_at(t)
    }

    fn nu_at(&self, t: f64) -> Option<f64> {
        self.inner.nu_at(t)
    }

    #[pyo3(signature = (max_spacing=0.0025))]
    fn grid(&self, max_spacing: f64) -> PyResult<PyGrid> {
        Ok(PyGrid {
            inner: self.inner.density_grid(max_spacing).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "RkSolution(status={:?}, t_span=({:.3e}, {:.3e}))",
            self.inner.status.as_str(),
            self.inner.t_span.0,
            self.inner.t_span.1
        )
    }
}

/// Sampled solution columns from one method.
#[pyclass(frozen, name = "SolutionGrid", module = "jacobi_gap")]
struct PyGrid {
    inner: SolutionGrid,
}

#[pymethods]
impl PyGrid {
    #[getter]
    fn method(&self) -> String {
        self.inner.method.to_string()
    }

    #[getter]
    fn params(&self) -> (f64, f64, f64) {
        self.inner.params
    }

    /// Rows as `(theta, phi, t, E, nu)` tuples in increasing `phi`.
    fn rows(&self) -> Vec<(f64, f64, f64, f64, f64)> {
        self.inner
            .rows
            .iter()
            .map(|r| (r.theta, r.phi, r.t, r.e, r.nu))
            .collect()
    }

    /// Seams as `(theta, gap, lower_method, upper_method)`; nonempty only
    /// for glued grids.
    fn seams(&self) -> Vec<(f64, f64, String, String)> {
        self.inner
            .seams
            .iter()
            .map(|s| {
                (
                    s.theta,
                    s.gap,
                    s.lower_method.to_string(),
                    s.upper_method.to_string(),
                )
            })
            .collect()
    }

    fn integral_nu_dphi(&self) -> f64 {
        self.inner.integral_nu_dphi()
    }

    fn interp_nu(&self, theta: f64) -> Option<f64> {
        self.inner.interp_nu(theta)
    }

    fn interp_e(&self, theta: f64) -> Option<f64> {
        self.inner.interp_e(theta)
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SolutionGrid(method={:?}, rows={})",
            self.inner.method.to_string(),
            self.inner.rows.len()
        )
    }
}

/// Agreement record from one two-method comparison.
#[pyclass(frozen, name = "ComparisonReport", module = "jacobi_gap")]
struct PyReport {
    inner: ComparisonReport,
}

#[pymethods]
impl PyReport {
    /// "agree", "disagree", or "rk-failed".
    #[getter]
    fn verdict(&self) -> String {
        self.inner.verdict.to_string()
    }

    #[getter]
    fn sup_diff_nu(&self) -> Option<f64> {
        self.inner.sup_diff_nu
    }

    #[getter]
    fn l2_diff_nu(&self) -> Option<f64> {
        self.inner.l2_diff_nu
    }

    #[getter]
    fn overlap_theta(&self) -> Option<(f64, f64)> {
        self.inner.overlap_theta
    }

    #[getter]
    fn rk_status(&self) -> &'static str {
        self.inner.rk_status
    }

    #[getter]
    fn warning(&self) -> Option<String> {
        self.inner.warning.clone()
    }

    #[getter]
    fn threshold(&self) -> f64 {
        self.inner.threshold
    }

    #[getter]
    fn series_degree(&self) -> usize {
        self.inner.series_degree
    }

    /// The full report as pretty-printed JSON, identical to the CLI output.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner)
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "ComparisonReport(verdict={:?}, sup_diff_nu={:?})",
            self.inner.verdict.to_string(),
            self.inner.sup_diff_nu
        )
    }
}

/// Dvoretzky-Kiefer-Wolfowitz sup-norm bound for an empirical CDF.
#[pyfunction]
fn dkw_bound(samples: usize, delta: f64) -> f64 {
    harness::dkw_bound(samples, delta)
}

/// `t = (1 + cos(phi)) / 2` for `phi` in `[0, pi]`.
#[pyfunction]
fn phi_to_t(phi: f64) -> PyResult<f64> {
    params::phi_to_t(phi).map_err(to_py_err)
}

/// Inverse angle substitution for `t` in `[0, 1]`.
#[pyfunction]
fn t_to_phi(t: f64) -> PyResult<f64> {
    params::t_to_phi(t).map_err(to_py_err)
}

#[pymodule(name = "jacobi_gap")]
fn bindings(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PySeries>()?;
    m.add_class::<PyRk>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(dkw_bound, m)?)?;
    m.add_function(wrap_pyfunction!(phi_to_t, m)?)?;
    m.add_function(wrap_pyfunction!(t_to_phi, m)?)?;
    Ok(())
}
