//! Python bindings: meshes, forward solves, gradients and estimation.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use acidfront::forward::{solve_direct_detailed, RefinementSchedule};
use acidfront::inverse::{add_noise, recovery_experiment, ExperimentSetup, MinimizeOptions};
use acidfront::{
    make_uniform_mesh, minimize, objective, reduced_gradient, solve_adjoint, Error, InitialProfile, NodalField,
};

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "Mesh", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMesh {
    inner: Arc<acidfront::Mesh>,
}

#[pymethods]
impl PyMesh {
    /// Uniform `n x n` mesh of the unit square.
    #[staticmethod]
    fn uniform(n: usize) -> PyResult<Self> {
        Ok(PyMesh {
            inner: Arc::new(make_uniform_mesh(n).map_err(to_py)?),
        })
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn triangle_count(&self) -> usize {
        self.inner.triangle_count()
    }

    fn nodes(&self) -> Vec<(f64, f64)> {
        self.inner.nodes().iter().map(|p| (p[0], p[1])).collect()
    }

    fn triangles(&self) -> Vec<(usize, usize, usize)> {
        self.inner.triangles().iter().map(|t| (t[0], t[1], t[2])).collect()
    }

    fn total_area(&self) -> f64 {
        self.inner.total_area()
    }
}

#[pyclass(name = "ModelParams", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyModelParams {
    inner: acidfront::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (delta1 = 12.5, rho2 = 1.0, d2 = 4e-5, delta3 = 1.0))]
    fn new(delta1: f64, rho2: f64, d2: f64, delta3: f64) -> PyResult<Self> {
        Ok(PyModelParams {
            inner: acidfront::ModelParams::new(delta1, rho2, d2, delta3).map_err(to_py)?,
        })
    }

    #[getter]
    fn delta1(&self) -> f64 {
        self.inner.delta1
    }

    #[getter]
    fn rho2(&self) -> f64 {
        self.inner.rho2
    }

    #[getter]
    fn d2(&self) -> f64 {
        self.inner.d2
    }

    #[getter]
    fn delta3(&self) -> f64 {
        self.inner.delta3
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "ModelParams(delta1={}, rho2={}, d2={}, delta3={})",
            p.delta1, p.rho2, p.d2, p.delta3
        )
    }
}

#[pyclass(name = "SolverConfig", skip_from_py_object)]
#[derive(Clone)]
pub struct PySolverConfig {
    inner: acidfront::SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    /// Full-size defaults: tau 0.1, T 10, 16x16 coarse mesh.
    #[new]
    fn new() -> Self {
        PySolverConfig {
            inner: acidfront::SolverConfig::default(),
        }
    }

    /// Small configuration: T 2 on an 8x8 coarse mesh.
    #[staticmethod]
    fn desk() -> Self {
        PySolverConfig {
            inner: acidfront::SolverConfig::desk(),
        }
    }

    #[getter]
    fn get_tau(&self) -> f64 {
        self.inner.tau
    }

    #[setter]
    fn set_tau(&mut self, v: f64) {
        self.inner.tau = v;
    }

    #[getter]
    fn get_t_final(&self) -> f64 {
        self.inner.t_final
    }

    #[setter]
    fn set_t_final(&mut self, v: f64) {
        self.inner.t_final = v;
    }

    #[getter]
    fn get_coarse_n(&self) -> usize {
        self.inner.coarse_n
    }

    #[setter]
    fn set_coarse_n(&mut self, v: usize) {
        self.inner.coarse_n = v;
    }

    #[getter]
    fn get_max_refines_per_step(&self) -> usize {
        self.inner.max_refines_per_step
    }

    #[setter]
    fn set_max_refines_per_step(&mut self, v: usize) {
        self.inner.max_refines_per_step = v;
    }

    #[getter]
    fn get_max_nodes(&self) -> usize {
        self.inner.max_nodes
    }

    #[setter]
    fn set_max_nodes(&mut self, v: usize) {
        self.inner.max_nodes = v;
    }

    #[getter]
    fn get_eps_tol(&self) -> f64 {
        self.inner.eps_tol
    }

    #[setter]
    fn set_eps_tol(&mut self, v: f64) {
        self.inner.eps_tol = v;
    }

    fn steps(&self) -> usize {
        self.inner.steps()
    }
}

/// Forward solution recorded on the coarse mesh, plus the refinement
/// schedule that produced it.
#[pyclass(name = "Trajectory", frozen)]
pub struct PyTrajectory {
    inner: acidfront::Trajectory,
    schedule: Arc<RefinementSchedule>,
    final_nodes: usize,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn levels(&self) -> usize {
        self.inner.levels()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.times.clone()
    }

    #[getter]
    fn final_nodes(&self) -> usize {
        self.final_nodes
    }

    fn mesh(&self) -> PyMesh {
        PyMesh {
            inner: self.inner.coarse_mesh.clone(),
        }
    }

    /// Nodal values of field `k` (1, 2 or 3) at time level `level`.
    fn field(&self, k: usize, level: usize) -> PyResult<Vec<f64>> {
        let state = self
            .inner
            .states
            .get(level)
            .ok_or_else(|| PyValueError::new_err(format!("level {level} out of range")))?;
        match k {
            1..=3 => Ok(state.fields()[k - 1].values().to_vec()),
            _ => Err(PyValueError::new_err("field index must be 1, 2 or 3")),
        }
    }

    fn u3_series(&self) -> Vec<Vec<f64>> {
        self.inner.states.iter().map(|s| s.u3.values().to_vec()).collect()
    }
}

fn profile(spec: &str) -> PyResult<InitialProfile> {
    spec.parse().map_err(to_py)
}

fn series(mesh: &acidfront::Mesh, data: Vec<Vec<f64>>) -> PyResult<Vec<NodalField>> {
    data.into_iter()
        .map(|v| NodalField::new(mesh, v).map_err(to_py))
        .collect()
}

/// Runs the adaptive forward solver.
#[pyfunction]
#[pyo3(signature = (params, config, profile_spec = "gaussian-seed(0.5, 0.5, 0.0005)"))]
fn simulate(py: Python<'_>, params: &PyModelParams, config: &PySolverConfig, profile_spec: &str) -> PyResult<PyTrajectory> {
    let init = profile(profile_spec)?;
    let (p, c) = (params.inner, config.inner.clone());
    let sol = py.detach(|| solve_direct_detailed(&p, &c, &init)).map_err(to_py)?;
    Ok(PyTrajectory {
        final_nodes: sol.final_mesh.node_count(),
        inner: sol.trajectory,
        schedule: Arc::new(sol.schedule),
    })
}

/// Objective and adjoint gradient of a trajectory against `u3` data.
#[pyfunction]
fn objective_and_gradient(traj: &PyTrajectory, params: &PyModelParams, data: Vec<Vec<f64>>) -> PyResult<(f64, f64)> {
    let data = series(&traj.inner.coarse_mesh, data)?;
    let j = objective(&traj.inner, &data).map_err(to_py)?;
    let adj = solve_adjoint(&traj.inner, &data, &params.inner).map_err(to_py)?;
    let g = reduced_gradient(&traj.inner, &adj).map_err(to_py)?;
    Ok((j, g))
}

/// Adds seeded Gaussian noise to a `u3` series.
#[pyfunction]
fn noisy(traj: &PyTrajectory, data: Vec<Vec<f64>>, sigma: f64, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let data = series(&traj.inner.coarse_mesh, data)?;
    Ok(add_noise(&data, sigma, seed)
        .map_err(to_py)?
        .into_iter()
        .map(|f| f.into_values())
        .collect())
}

fn setup(config: &PySolverConfig, profile_spec: &str, bounds: (f64, f64), max_evaluations: usize) -> PyResult<ExperimentSetup> {
    Ok(ExperimentSetup {
        config: config.inner.clone(),
        profile: profile(profile_spec)?,
        bounds: [bounds.0, bounds.1],
        options: MinimizeOptions {
            max_evaluations,
            ..MinimizeOptions::default()
        },
        ..ExperimentSetup::default()
    })
}

/// Fits `delta1` to `u3` data generated by `data_run`, replaying its meshes.
/// Returns `(delta1_star, objective, gradient, evaluations)`.
#[pyfunction]
#[pyo3(signature = (data_run, data, config, delta1_init, profile_spec = "gaussian-seed(0.5, 0.5, 0.0005)", bounds = (0.0, 20.0), max_evaluations = 100))]
#[allow(clippy::too_many_arguments)]
fn estimate(
    py: Python<'_>,
    data_run: &PyTrajectory,
    data: Vec<Vec<f64>>,
    config: &PySolverConfig,
    delta1_init: f64,
    profile_spec: &str,
    bounds: (f64, f64),
    max_evaluations: usize,
) -> PyResult<(f64, f64, f64, usize)> {
    let data = series(&data_run.inner.coarse_mesh, data)?;
    let problem = setup(config, profile_spec, bounds, max_evaluations)?.problem_for(
        data,
        Some(data_run.schedule.clone()),
        delta1_init,
    );
    let r = py.detach(|| minimize(&problem)).map_err(to_py)?;
    Ok((r.delta1_star, r.objective_value, r.gradient_value, r.evaluations))
}

/// Repeated noisy recoveries from random starts.
/// Returns `(mean, std, rel_error, failures, estimates)`.
#[pyfunction]
#[pyo3(signature = (config, true_delta1, sigma, n_runs, seed, profile_spec = "gaussian-seed(0.5, 0.5, 0.0005)"))]
fn recovery(
    py: Python<'_>,
    config: &PySolverConfig,
    true_delta1: f64,
    sigma: f64,
    n_runs: usize,
    seed: u64,
    profile_spec: &str,
) -> PyResult<(f64, f64, f64, usize, Vec<f64>)> {
    let setup = setup(config, profile_spec, (0.0, 20.0), 100)?;
    let s = py
        .detach(|| recovery_experiment(&setup, true_delta1, sigma, n_runs, seed))
        .map_err(to_py)?;
    Ok((s.mean, s.std, s.rel_error, s.failures, s.estimates))
}

#[pymodule]
fn acidfront_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PyModelParams>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(objective_and_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(noisy, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(recovery, m)?)?;
    Ok(())
}
