//! Python bindings: grids, the energy/constraint models, the projected flow,
//! the chart machinery and the exponent-estimation pipeline.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use loja_lab::energy::{
    allen_cahn_model, constraint_hessian_example, graph_area_model, integral_constraint,
    lambda_profile, mass_constraint, revolution_model, revolution_volume_constraint,
    ConstraintModel, CoordinateEnergy, EnergyModel, FreeConstraint, LambdaRule, MonomialModel,
    NamedScalar, SeqQuadModel, SphereConstraint,
};
use loja_lab::error::Error;
use loja_lab::flow::{FlowOptions, FlowStatus};
use loja_lab::geometry::ChartData;
use loja_lab::numerics::Grid1D;

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::Contract(_) | Error::InsufficientSamples { .. } => {
            PyValueError::new_err(err.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_rule(rule: &str) -> PyResult<LambdaRule> {
    match rule {
        "geometric" => Ok(LambdaRule::Geometric),
        "inverse_square" => Ok(LambdaRule::InverseSquare),
        other => Err(PyValueError::new_err(format!(
            "unknown lambda rule '{other}' (geometric, inverse_square)"
        ))),
    }
}

/// Uniform 1-D Dirichlet mesh.
#[pyclass(name = "Grid1D", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: Grid1D,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(a: f64, b: f64, n: usize) -> PyResult<Self> {
        Ok(Self {
            inner: Grid1D::new(a, b, n).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    /// Interior node coordinates.
    fn nodes(&self) -> Vec<f64> {
        (0..self.inner.n()).map(|i| self.inner.x(i)).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid1D(a={}, b={}, n={})",
            self.inner.a(),
            self.inner.b(),
            self.inner.n()
        )
    }
}

/// An energy model (opaque handle).
#[pyclass(name = "Energy", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEnergy {
    inner: Arc<dyn EnergyModel>,
}

#[pymethods]
impl PyEnergy {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.space().dim
    }

    #[getter]
    fn weight(&self) -> f64 {
        self.inner.space().weight
    }

    fn energy(&self, u: Vec<f64>) -> PyResult<f64> {
        self.inner.energy(&u).map_err(to_py_err)
    }

    fn gradient(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.h_gradient(&u).map_err(to_py_err)
    }

    fn hessian_apply(&self, u: Vec<f64>, v: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.hessian_apply(&u, &v).map_err(to_py_err)
    }

    fn admissible(&self, u: Vec<f64>) -> bool {
        self.inner.admissible(&u)
    }
}

/// A constraint model (opaque handle); `count == 0` is the free case.
#[pyclass(name = "Constraint", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyConstraint {
    inner: Arc<dyn ConstraintModel>,
}

#[pymethods]
impl PyConstraint {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.space().dim
    }

    #[getter]
    fn count(&self) -> usize {
        self.inner.count()
    }

    fn value(&self, u: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.value(&u).map_err(to_py_err)
    }

    fn gradients(&self, u: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        self.inner.h_gradients(&u).map_err(to_py_err)
    }
}

#[pyfunction]
fn revolution(grid: &PyGrid) -> PyEnergy {
    PyEnergy {
        inner: Arc::new(revolution_model(grid.inner)),
    }
}

#[pyfunction]
fn graph_area(grid: &PyGrid) -> PyEnergy {
    PyEnergy {
        inner: Arc::new(graph_area_model(grid.inner)),
    }
}

#[pyfunction]
fn allen_cahn(grid: &PyGrid) -> PyEnergy {
    PyEnergy {
        inner: Arc::new(allen_cahn_model(grid.inner)),
    }
}

#[pyfunction]
#[pyo3(signature = (grid, target = 0.0))]
fn mass(grid: &PyGrid, target: f64) -> PyConstraint {
    PyConstraint {
        inner: Arc::new(mass_constraint(grid.inner, target)),
    }
}

#[pyfunction]
fn volume(grid: &PyGrid, nu: f64) -> PyConstraint {
    PyConstraint {
        inner: Arc::new(revolution_volume_constraint(grid.inner, nu)),
    }
}

#[pyfunction]
#[pyo3(signature = (grid, g, target = 0.0))]
fn integral(grid: &PyGrid, g: &str, target: f64) -> PyResult<PyConstraint> {
    let named = match g {
        "identity" => NamedScalar::Identity,
        "square" => NamedScalar::Square,
        "constant" => NamedScalar::Constant,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown integrand '{other}' (identity, square, constant)"
            )))
        }
    };
    Ok(PyConstraint {
        inner: Arc::new(integral_constraint(grid.inner, Box::new(named), target)),
    })
}

#[pyfunction]
#[pyo3(signature = (n, rule = "geometric"))]
fn seq_quad(n: usize, rule: &str) -> PyResult<PyEnergy> {
    Ok(PyEnergy {
        inner: Arc::new(SeqQuadModel::new(n, parse_rule(rule)?)),
    })
}

#[pyfunction]
fn seq_quad_weights(lambda: Vec<f64>) -> PyResult<PyEnergy> {
    Ok(PyEnergy {
        inner: Arc::new(SeqQuadModel::from_lambda(lambda).map_err(to_py_err)?),
    })
}

#[pyfunction]
#[pyo3(signature = (n, rule = "geometric"))]
fn graph_example(n: usize, rule: &str) -> PyResult<(PyEnergy, PyConstraint)> {
    let lambda = lambda_profile(parse_rule(rule)?, n);
    let (e, g) = constraint_hessian_example(lambda).map_err(to_py_err)?;
    Ok((
        PyEnergy { inner: Arc::new(e) },
        PyConstraint { inner: Arc::new(g) },
    ))
}

#[pyfunction]
fn monomial(degree: u32) -> PyResult<PyEnergy> {
    Ok(PyEnergy {
        inner: Arc::new(MonomialModel::new(degree).map_err(to_py_err)?),
    })
}

#[pyfunction]
fn sphere(dim: usize) -> PyResult<PyConstraint> {
    Ok(PyConstraint {
        inner: Arc::new(SphereConstraint::new(dim).map_err(to_py_err)?),
    })
}

#[pyfunction]
fn coordinate_energy(dim: usize, axis: usize) -> PyResult<PyEnergy> {
    Ok(PyEnergy {
        inner: Arc::new(CoordinateEnergy::new(dim, axis).map_err(to_py_err)?),
    })
}

#[pyfunction]
fn free_constraint(energy: &PyEnergy) -> PyConstraint {
    PyConstraint {
        inner: Arc::new(FreeConstraint::new(energy.inner.space())),
    }
}

#[pyfunction]
fn multiplier(e: &PyEnergy, c: &PyConstraint, u: Vec<f64>) -> PyResult<Vec<f64>> {
    loja_lab::geometry::multiplier(e.inner.as_ref(), c.inner.as_ref(), &u).map_err(to_py_err)
}

#[pyfunction]
fn project_tangent(e: &PyEnergy, c: &PyConstraint, u: Vec<f64>) -> PyResult<Vec<f64>> {
    loja_lab::geometry::project_tangent(e.inner.as_ref(), c.inner.as_ref(), &u).map_err(to_py_err)
}

#[pyfunction]
fn retract(c: &PyConstraint, u: Vec<f64>) -> PyResult<Vec<f64>> {
    loja_lab::geometry::retract(c.inner.as_ref(), &u).map_err(to_py_err)
}

/// Result of a flow run.
#[pyclass(name = "FlowResult", frozen)]
struct PyFlowResult {
    status: String,
    steps: u64,
    records: Vec<(u64, f64, f64, Vec<f64>, f64)>,
    final_state: Vec<f64>,
    csv: String,
}

#[pymethods]
impl PyFlowResult {
    #[getter]
    fn status(&self) -> &str {
        &self.status
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.steps
    }

    /// Rows of `(step, t, energy, constraints, pgrad_norm)`.
    fn records(&self) -> Vec<(u64, f64, f64, Vec<f64>, f64)> {
        self.records.clone()
    }

    fn final_state(&self) -> Vec<f64> {
        self.final_state.clone()
    }

    fn to_csv(&self) -> &str {
        &self.csv
    }
}

fn flow_options(
    dt_max: f64,
    cfl_coeff: f64,
    tol_pgrad: f64,
    t_max: f64,
    retract_every: usize,
    record_every: usize,
) -> FlowOptions {
    FlowOptions {
        dt_max,
        cfl_coeff,
        tol_pgrad,
        t_max,
        retract_every,
        record_every,
    }
}

#[pyfunction]
#[pyo3(signature = (e, c, u0, *, dt_max = 1e-2, cfl_coeff = 0.2, tol_pgrad = 1e-8, t_max = 10.0, retract_every = 1, record_every = 10))]
#[allow(clippy::too_many_arguments)]
fn run_flow(
    e: &PyEnergy,
    c: &PyConstraint,
    u0: Vec<f64>,
    dt_max: f64,
    cfl_coeff: f64,
    tol_pgrad: f64,
    t_max: f64,
    retract_every: usize,
    record_every: usize,
) -> PyResult<PyFlowResult> {
    let opts = flow_options(
        dt_max,
        cfl_coeff,
        tol_pgrad,
        t_max,
        retract_every,
        record_every,
    );
    let trace = loja_lab::flow::run_flow(e.inner.as_ref(), c.inner.as_ref(), &u0, &opts)
        .map_err(to_py_err)?;
    let status = match &trace.status {
        FlowStatus::Converged => "converged".to_string(),
        FlowStatus::TMaxReached => "t_max_reached".to_string(),
        FlowStatus::Failed(reason) => format!("failed: {reason}"),
    };
    Ok(PyFlowResult {
        status,
        steps: trace.steps_taken,
        records: trace
            .records
            .iter()
            .map(|r| (r.step, r.t, r.energy, r.constraints.clone(), r.pgrad_norm))
            .collect(),
        csv: trace.to_csv(),
        final_state: trace.final_state,
    })
}

#[pyfunction]
#[pyo3(signature = (e, c, u0, *, dt_max = 1e-2, cfl_coeff = 0.2, tol_pgrad = 1e-8, t_max = 10.0, retract_every = 1, record_every = 10))]
#[allow(clippy::too_many_arguments)]
fn find_critical(
    e: &PyEnergy,
    c: &PyConstraint,
    u0: Vec<f64>,
    dt_max: f64,
    cfl_coeff: f64,
    tol_pgrad: f64,
    t_max: f64,
    retract_every: usize,
    record_every: usize,
) -> PyResult<Vec<f64>> {
    let opts = flow_options(
        dt_max,
        cfl_coeff,
        tol_pgrad,
        t_max,
        retract_every,
        record_every,
    );
    loja_lab::loja::find_critical(e.inner.as_ref(), c.inner.as_ref(), &u0, &opts).map_err(to_py_err)
}

#[pyfunction]
fn sample_near(
    e: &PyEnergy,
    c: &PyConstraint,
    u_bar: Vec<f64>,
    radius: f64,
    count: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    loja_lab::loja::sample_near(
        e.inner.as_ref(),
        c.inner.as_ref(),
        &u_bar,
        radius,
        count,
        seed,
    )
    .map_err(to_py_err)
}

fn fit_to_dict(py: Python<'_>, fit: &loja_lab::loja::LojaFit) -> PyResult<Py<PyAny>> {
    use pyo3::types::PyDict;
    let d = PyDict::new(py);
    d.set_item("theta", fit.theta)?;
    d.set_item("C", fit.c)?;
    d.set_item("slope", fit.slope)?;
    d.set_item("r2", fit.r2)?;
    d.set_item("n_samples", fit.n_samples)?;
    d.set_item("emin", fit.window.emin)?;
    d.set_item("emax", fit.window.emax)?;
    d.set_item("in_range_flag", fit.in_range_flag)?;
    Ok(d.into_any().unbind())
}

#[pyfunction]
fn fit_exponent(
    py: Python<'_>,
    e: &PyEnergy,
    c: &PyConstraint,
    u_bar: Vec<f64>,
    samples: Vec<Vec<f64>>,
) -> PyResult<Py<PyAny>> {
    let fit = loja_lab::loja::fit_exponent(e.inner.as_ref(), c.inner.as_ref(), &u_bar, &samples)
        .map_err(to_py_err)?;
    fit_to_dict(py, &fit)
}

#[pyfunction]
fn best_constant(weights: Vec<f64>, theta: f64, sigma: f64) -> PyResult<f64> {
    let model = SeqQuadModel::from_lambda(weights).map_err(to_py_err)?;
    loja_lab::loja::best_constant(&model, theta, sigma).map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (ns, rule = "geometric", theta = 0.5, sigma = 0.1))]
fn blowup_sweep(
    ns: Vec<usize>,
    rule: &str,
    theta: f64,
    sigma: f64,
) -> PyResult<Vec<(usize, f64, Option<f64>)>> {
    let table =
        loja_lab::loja::blowup_sweep(&ns, parse_rule(rule)?, theta, sigma).map_err(to_py_err)?;
    Ok(table.rows.iter().map(|r| (r.n, r.c, r.ratio)).collect())
}

#[pyfunction]
#[pyo3(signature = (ns, rule = "geometric", theta = 0.5, sigma = 0.1))]
fn pullback_blowup_sweep(
    ns: Vec<usize>,
    rule: &str,
    theta: f64,
    sigma: f64,
) -> PyResult<Vec<(usize, f64, Option<f64>)>> {
    let table = loja_lab::loja::pullback_blowup_sweep(&ns, parse_rule(rule)?, theta, sigma)
        .map_err(to_py_err)?;
    Ok(table.rows.iter().map(|r| (r.n, r.c, r.ratio)).collect())
}

/// Graph chart of a constraint set around a base point.
#[pyclass(name = "Chart", frozen)]
struct PyChart {
    inner: ChartData,
}

#[pymethods]
impl PyChart {
    #[getter]
    fn dim_v0(&self) -> usize {
        self.inner.dim_v0()
    }

    #[getter]
    fn dim_v1(&self) -> usize {
        self.inner.dim_v1()
    }

    fn u_bar(&self) -> Vec<f64> {
        self.inner.u_bar().to_vec()
    }

    /// Kernel-space coefficients of `v - u_bar`.
    fn coefficients(&self, v: Vec<f64>) -> Vec<f64> {
        self.inner.v0_coefficients(&v)
    }

    fn psi(&self, c: &PyConstraint, omega: Vec<f64>) -> PyResult<Vec<f64>> {
        loja_lab::geometry::psi(&self.inner, c.inner.as_ref(), &omega).map_err(to_py_err)
    }

    fn phi(&self, c: &PyConstraint, omega: Vec<f64>) -> PyResult<Vec<f64>> {
        loja_lab::geometry::phi(&self.inner, c.inner.as_ref(), &omega).map_err(to_py_err)
    }

    fn psi_prime(&self, c: &PyConstraint, omega: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let m = loja_lab::geometry::psi_prime(&self.inner, c.inner.as_ref(), &omega)
            .map_err(to_py_err)?;
        Ok((0..m.rows()).map(|i| m.row(i).to_vec()).collect())
    }

    fn tangent_angles(&self, c: &PyConstraint, omega: Vec<f64>) -> PyResult<(f64, f64)> {
        loja_lab::geometry::tangent_identity_check(&self.inner, c.inner.as_ref(), &omega)
            .map_err(to_py_err)
    }

    fn pullback_energy(&self, e: &PyEnergy, c: &PyConstraint, omega: Vec<f64>) -> PyResult<f64> {
        loja_lab::geometry::pullback_energy(&self.inner, e.inner.as_ref(), c.inner.as_ref(), &omega)
            .map_err(to_py_err)
    }

    fn pullback_grad(&self, e: &PyEnergy, c: &PyConstraint, omega: Vec<f64>) -> PyResult<Vec<f64>> {
        loja_lab::geometry::pullback_grad(&self.inner, e.inner.as_ref(), c.inner.as_ref(), &omega)
            .map_err(to_py_err)
    }

    /// `(eigenvalues, kernel_dim, index_zero_analog)` of the pullback Hessian
    /// at the base point.
    fn hessian_report(&self, e: &PyEnergy, c: &PyConstraint) -> PyResult<(Vec<f64>, usize, bool)> {
        let rep = loja_lab::loja::hessian_report(&self.inner, e.inner.as_ref(), c.inner.as_ref())
            .map_err(to_py_err)?;
        Ok((rep.eigenvalues, rep.kernel_dim, rep.index_zero_analog))
    }
}

#[pyfunction]
fn build_chart(c: &PyConstraint, u_bar: Vec<f64>) -> PyResult<PyChart> {
    Ok(PyChart {
        inner: loja_lab::geometry::build_chart(c.inner.as_ref(), &u_bar).map_err(to_py_err)?,
    })
}

#[pymodule]
fn loja_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyEnergy>()?;
    m.add_class::<PyConstraint>()?;
    m.add_class::<PyFlowResult>()?;
    m.add_class::<PyChart>()?;
    m.add_function(wrap_pyfunction!(revolution, m)?)?;
    m.add_function(wrap_pyfunction!(graph_area, m)?)?;
    m.add_function(wrap_pyfunction!(allen_cahn, m)?)?;
    m.add_function(wrap_pyfunction!(mass, m)?)?;
    m.add_function(wrap_pyfunction!(volume, m)?)?;
    m.add_function(wrap_pyfunction!(integral, m)?)?;
    m.add_function(wrap_pyfunction!(seq_quad, m)?)?;
    m.add_function(wrap_pyfunction!(seq_quad_weights, m)?)?;
    m.add_function(wrap_pyfunction!(graph_example, m)?)?;
    m.add_function(wrap_pyfunction!(monomial, m)?)?;
    m.add_function(wrap_pyfunction!(sphere, m)?)?;
    m.add_function(wrap_pyfunction!(coordinate_energy, m)?)?;
    m.add_function(wrap_pyfunction!(free_constraint, m)?)?;
    m.add_function(wrap_pyfunction!(multiplier, m)?)?;
    m.add_function(wrap_pyfunction!(project_tangent, m)?)?;
    m.add_function(wrap_pyfunction!(retract, m)?)?;
    m.add_function(wrap_pyfunction!(run_flow, m)?)?;
    m.add_function(wrap_pyfunction!(find_critical, m)?)?;
    m.add_function(wrap_pyfunction!(sample_near, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(best_constant, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(pullback_blowup_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(build_chart, m)?)?;
    Ok(())
}
