//! Python bindings: market parameters, grids, solves, Greeks, the
//! reference solution, stability functions and order fits.

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pdcp::experiments::{build_reference, ReferenceProtocol};
use pdcp::stepper::{solve_pdcp, GridKind, Method, SolverConfig, StepperSpec};
use pdcp::{Market, PdcpError, RegionOfInterest};

fn py_err(e: PdcpError) -> PyErr {
    match e {
        PdcpError::SingularMatrix { .. }
        | PdcpError::Breakdown { .. }
        | PdcpError::LinearNotConverged { .. }
        | PdcpError::PenaltyNotConverged { .. }
        | PdcpError::Step { .. } => PyRuntimeError::new_err(e.to_string()),
        PdcpError::Io(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = PdcpError>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

#[pyclass(name = "MarketParams1D", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyMarket1D(pdcp::MarketParams1D);

#[pymethods]
impl PyMarket1D {
    #[new]
    #[pyo3(signature = (sigma=0.4, r=0.02, maturity=0.5, strike=100.0, s_max=500.0))]
    fn new(sigma: f64, r: f64, maturity: f64, strike: f64, s_max: f64) -> PyResult<Self> {
        pdcp::MarketParams1D::new(sigma, r, maturity, strike, s_max).map(Self).map_err(py_err)
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma
    }
    #[getter]
    fn r(&self) -> f64 {
        self.0.r
    }
    #[getter]
    fn maturity(&self) -> f64 {
        self.0.maturity
    }
    #[getter]
    fn strike(&self) -> f64 {
        self.0.strike
    }
    #[getter]
    fn s_max(&self) -> f64 {
        self.0.s_max
    }

    fn payoff(&self, s: f64) -> f64 {
        self.0.payoff(s)
    }

    fn __repr__(&self) -> String {
        let p = self.0;
        format!(
            "MarketParams1D(sigma={}, r={}, maturity={}, strike={}, s_max={})",
            p.sigma, p.r, p.maturity, p.strike, p.s_max
        )
    }
}

#[pyclass(name = "MarketParams2D", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyMarket2D(pdcp::MarketParams2D);

#[pymethods]
impl PyMarket2D {
    #[new]
    #[pyo3(signature = (sigma1=0.3, sigma2=0.4, rho=0.5, r=0.01, maturity=0.5, strike=100.0, s_max=500.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(sigma1: f64, sigma2: f64, rho: f64, r: f64, maturity: f64, strike: f64, s_max: f64) -> PyResult<Self> {
        pdcp::MarketParams2D::new(sigma1, sigma2, rho, r, maturity, strike, s_max).map(Self).map_err(py_err)
    }

    #[getter]
    fn sigma1(&self) -> f64 {
        self.0.sigma1
    }
    #[getter]
    fn sigma2(&self) -> f64 {
        self.0.sigma2
    }
    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho
    }
    #[getter]
    fn r(&self) -> f64 {
        self.0.r
    }
    #[getter]
    fn maturity(&self) -> f64 {
        self.0.maturity
    }
    #[getter]
    fn strike(&self) -> f64 {
        self.0.strike
    }
    #[getter]
    fn s_max(&self) -> f64 {
        self.0.s_max
    }

    fn payoff(&self, s1: f64, s2: f64) -> f64 {
        self.0.payoff(s1, s2)
    }

    fn __repr__(&self) -> String {
        let p = self.0;
        format!(
            "MarketParams2D(sigma1={}, sigma2={}, rho={}, r={}, maturity={}, strike={}, s_max={})",
            p.sigma1, p.sigma2, p.rho, p.r, p.maturity, p.strike, p.s_max
        )
    }
}

fn market_from(obj: &Bound<'_, PyAny>) -> PyResult<Market> {
    if let Ok(p) = obj.extract::<PyMarket1D>() {
        Ok(Market::OneAsset(p.0))
    } else if let Ok(p) = obj.extract::<PyMarket2D>() {
        Ok(Market::TwoAsset(p.0))
    } else {
        Err(PyValueError::new_err("expected MarketParams1D or MarketParams2D"))
    }
}

/// A discretised problem: spatial grids, the operator and the payoff.
#[pyclass(name = "Problem", frozen)]
struct PyProblem(pdcp::Setup);

#[pymethods]
impl PyProblem {
    #[new]
    fn new(market: &Bound<'_, PyAny>, m: usize) -> PyResult<Self> {
        pdcp::Setup::new(market_from(market)?, m).map(Self).map_err(py_err)
    }

    #[getter]
    fn dims(&self) -> usize {
        self.0.dims()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m
    }

    /// Grid points, one list per direction.
    #[getter]
    fn grids(&self) -> Vec<Vec<f64>> {
        self.0.grids().iter().map(|g| g.points().to_vec()).collect()
    }

    /// Cell-averaged payoff, row-major in 2D.
    #[getter]
    fn u0(&self) -> Vec<f64> {
        self.0.problem.u0.clone()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.0.problem.a_matrix.nnz()
    }

    /// Solves to maturity; returns `(u, penalty_iterations)`.
    #[pyo3(signature = (method="dirka", n_steps=100, grid_kind="quadratic", damping_steps=2))]
    fn solve(
        &self,
        py: Python<'_>,
        method: &str,
        n_steps: usize,
        grid_kind: &str,
        damping_steps: usize,
    ) -> PyResult<(Vec<f64>, usize)> {
        let spec = StepperSpec::new(parse::<Method>(method)?, damping_steps, parse::<GridKind>(grid_kind)?, n_steps);
        let problem = &self.0.problem;
        let (u, traces) = py
            .detach(|| solve_pdcp(problem, &spec, &SolverConfig::default()))
            .map_err(py_err)?;
        let kappa = traces.iter().flat_map(|t| t.kappa.iter()).sum();
        Ok((u, kappa))
    }

    /// Reference solution under the default protocol for the dimension.
    fn reference(&self, py: Python<'_>) -> PyResult<Vec<f64>> {
        let setup = &self.0;
        let protocol = ReferenceProtocol::default_for(setup.dims());
        py.detach(|| build_reference(setup, &protocol, &SolverConfig::default()))
            .map(|r| r.u_ref)
            .map_err(py_err)
    }

    /// Value and Greeks of `u` keyed by name.
    fn greeks<'py>(&self, py: Python<'py>, u: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let q = self.0.quantities(&u).map_err(py_err)?;
        let d = PyDict::new(py);
        for (name, v) in self.0.quantity_names().iter().zip(q) {
            d.set_item(*name, v)?;
        }
        Ok(d)
    }

    /// `u` interpolated at the strike (all coordinates equal to K).
    fn value_at_strike(&self, u: Vec<f64>) -> PyResult<f64> {
        self.0.value_at_strike(&u).map_err(py_err)
    }

    /// Max abs difference over the default region of interest, or over
    /// `[lo, hi]` in every direction.
    #[pyo3(signature = (u_ref, u, roi=None))]
    fn roi_max_error(&self, u_ref: Vec<f64>, u: Vec<f64>, roi: Option<(f64, f64)>) -> PyResult<f64> {
        let roi = match roi {
            Some((lo, hi)) => RegionOfInterest::new(lo, hi),
            None => RegionOfInterest::default_for(&self.0.market),
        };
        pdcp::roi_max_error(&u_ref, &u, &self.0.grids(), &roi).map_err(py_err)
    }
}

/// Nonuniform spatial grid of `m` points on `[0, s_max]`.
#[pyfunction]
fn build_grid(m: usize, strike: f64, s_max: f64) -> PyResult<Vec<f64>> {
    pdcp::build_grid(m, strike, s_max).map(|g| g.points().to_vec()).map_err(py_err)
}

/// Stability function `R(z)` of a method.
#[pyfunction]
fn stability_function(method: &str, z: Complex64) -> PyResult<Complex64> {
    pdcp::stepper::stability_function(parse::<Method>(method)?, z).map_err(py_err)
}

/// Least-squares slope of `log error` against `log N`.
#[pyfunction]
fn estimate_order(pairs: Vec<(usize, f64)>) -> PyResult<f64> {
    pdcp::estimate_order(&pairs).map(|e| e.order).map_err(py_err)
}

#[pymodule]
pub fn pdcp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMarket1D>()?;
    m.add_class::<PyMarket2D>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(build_grid, m)?)?;
    m.add_function(wrap_pyfunction!(stability_function, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_order, m)?)?;
    Ok(())
}
