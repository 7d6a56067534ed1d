//! Python bindings: special functions, the closure map and the field solvers.

use graphene_hydro::closure::{self, regimes};
use graphene_hydro::kernels::{self, KernelArgs};
use graphene_hydro::reduced::{self, DiffusionConfig, Regime};
use graphene_hydro::solver::{self, FieldGrid, Mesh, SolverConfig};
use graphene_hydro::{special, Error, MomentState};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(graphene_hydro, NumericalError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain { .. } | Error::UnsupportedOrder(_) | Error::Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => NumericalError::new_err(e.to_string()),
    }
}

/// Carrier speed, temperature, Planck constant, relaxation time and Poisson constant.
#[pyclass(name = "PhysicalScales", frozen)]
#[derive(Clone, Copy)]
struct PyScales(graphene_hydro::PhysicalScales);

#[pymethods]
impl PyScales {
    #[new]
    #[pyo3(signature = (c = 1.0, kbt = 1.0, hbar = 1.0, tau0 = 1.0, gamma = 1.0))]
    fn new(c: f64, kbt: f64, hbar: f64, tau0: f64, gamma: f64) -> PyResult<Self> {
        graphene_hydro::PhysicalScales::new(c, kbt, hbar, tau0, gamma)
            .map(PyScales)
            .map_err(to_py)
    }

    /// Graphene at `t` kelvin in SI units.
    #[staticmethod]
    #[pyo3(signature = (t, tau0, eps_r = 1.0))]
    fn graphene_si(t: f64, tau0: f64, eps_r: f64) -> PyResult<Self> {
        graphene_hydro::PhysicalScales::graphene_si(t, tau0, eps_r)
            .map(PyScales)
            .map_err(to_py)
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.c
    }

    #[getter]
    fn kbt(&self) -> f64 {
        self.0.kbt
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.0.hbar
    }

    #[getter]
    fn tau0(&self) -> f64 {
        self.0.tau0
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma
    }

    /// Reference density n_T = (k_BT)²/(2πħ²c²).
    #[getter]
    fn n_t(&self) -> f64 {
        self.0.n_t()
    }

    /// The same physics in reduced units c = k_BT = ħ = 1.
    fn reduced(&self) -> Self {
        PyScales(self.0.to_reduced())
    }

    fn __repr__(&self) -> String {
        let s = &self.0;
        format!(
            "PhysicalScales(c={}, kbt={}, hbar={}, tau0={}, gamma={})",
            s.c, s.kbt, s.hbar, s.tau0, s.gamma
        )
    }
}

fn scales_or_reduced(scales: Option<PyScales>) -> graphene_hydro::PhysicalScales {
    scales.map_or(graphene_hydro::PhysicalScales::reduced(1.0, 1.0), |s| s.0)
}

#[pyclass(name = "Multipliers", frozen)]
#[derive(Clone, Copy)]
struct PyMultipliers(closure::Multipliers);

#[pymethods]
impl PyMultipliers {
    #[new]
    #[pyo3(signature = (a, b, theta_b = 0.0))]
    fn new(a: f64, b: f64, theta_b: f64) -> PyResult<Self> {
        closure::Multipliers::new(a, b, theta_b)
            .map(PyMultipliers)
            .map_err(to_py)
    }

    #[getter]
    fn a(&self) -> f64 {
        self.0.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.0.b
    }

    #[getter]
    fn theta_b(&self) -> f64 {
        self.0.theta_b
    }

    fn __repr__(&self) -> String {
        format!(
            "Multipliers(a={}, b={}, theta_b={})",
            self.0.a, self.0.b, self.0.theta_b
        )
    }
}

#[pyclass(name = "ClosureTensors", frozen, get_all)]
struct PyTensors {
    p: [[f64; 2]; 2],
    q: [[f64; 2]; 2],
    p_par: f64,
    p_perp: f64,
    q_par: f64,
    q_perp: f64,
}

impl From<closure::ClosureTensors> for PyTensors {
    fn from(t: closure::ClosureTensors) -> Self {
        PyTensors {
            p: t.p,
            q: t.q,
            p_par: t.p_par,
            p_perp: t.p_perp,
            q_par: t.q_par,
            q_perp: t.q_perp,
        }
    }
}

/// Normalized Fermi integral φ_s(x).
#[pyfunction]
fn fermi_phi(s: f64, x: f64) -> PyResult<f64> {
    special::fermi_phi(s, x).map_err(to_py)
}

/// x with φ₂(x) = y.
#[pyfunction]
fn fermi_phi_inverse(y: f64) -> PyResult<f64> {
    special::fermi_phi_inverse(y).map_err(to_py)
}

/// Angular kernel: θ-average of cos(Nθ) φ_s(A + B cos θ).
#[pyfunction]
fn kernel(n: u32, s: f64, a: f64, b: f64) -> PyResult<f64> {
    KernelArgs::new(n, s, a, b).and_then(kernels::kernel).map_err(to_py)
}

/// (n, ux, uy) produced by the multipliers.
#[pyfunction]
#[pyo3(signature = (m, scales = None))]
fn forward_map(m: PyMultipliers, scales: Option<PyScales>) -> PyResult<(f64, f64, f64)> {
    let s = closure::forward_map(m.0, &scales_or_reduced(scales)).map_err(to_py)?;
    Ok((s.n, s.u[0], s.u[1]))
}

#[pyfunction]
#[pyo3(signature = (n, ux, uy, scales = None, tol = closure::DEFAULT_INVERSION_TOL))]
fn invert_constraints(n: f64, ux: f64, uy: f64, scales: Option<PyScales>, tol: f64) -> PyResult<PyMultipliers> {
    let state = MomentState::new(n, [ux, uy]).map_err(to_py)?;
    closure::invert_constraints(state, &scales_or_reduced(scales), tol)
        .map(PyMultipliers)
        .map_err(to_py)
}

/// Multipliers and closure tensors of the state (n, ux, uy).
#[pyfunction]
#[pyo3(signature = (n, ux, uy, scales = None))]
fn close(n: f64, ux: f64, uy: f64, scales: Option<PyScales>) -> PyResult<(PyMultipliers, PyTensors)> {
    let state = MomentState::new(n, [ux, uy]).map_err(to_py)?;
    let (m, t) = closure::close(state, &scales_or_reduced(scales), None).map_err(to_py)?;
    Ok((PyMultipliers(m), t.into()))
}

#[pyfunction]
fn regime_x(u: f64) -> PyResult<f64> {
    regimes::regime_x(u).map_err(to_py)
}

/// (Y, Z, Z_perp) at |u|.
#[pyfunction]
fn regime_yz(u: f64) -> PyResult<(f64, f64, f64)> {
    let r = regimes::regime_yz(u).map_err(to_py)?;
    Ok((r.y, r.z, r.z_perp))
}

fn parse_regime(name: &str) -> PyResult<Regime> {
    match name {
        "general" => Ok(Regime::General),
        "maxwell_boltzmann" => Ok(Regime::MaxwellBoltzmann),
        "degenerate" => Ok(Regime::Degenerate),
        other => Err(PyValueError::new_err(format!("unknown regime {other:?}"))),
    }
}

#[pyfunction]
#[pyo3(signature = (regime, n, scales = None))]
fn mobility(regime: &str, n: f64, scales: Option<PyScales>) -> PyResult<f64> {
    reduced::mobility(parse_regime(regime)?, n, &scales_or_reduced(scales)).map_err(to_py)
}

/// Zero-flux drift-diffusion profile on a line for potential `v`; returns (n, residual).
#[pyfunction]
#[pyo3(signature = (regime, v, dx, n_ref, sign = 1.0, scales = None))]
fn drift_diffusion_steady_state(
    regime: &str,
    v: Vec<f64>,
    dx: f64,
    n_ref: f64,
    sign: f64,
    scales: Option<PyScales>,
) -> PyResult<(Vec<f64>, f64)> {
    let scales = scales_or_reduced(scales);
    let cfg = DiffusionConfig {
        regime: parse_regime(regime)?,
        tau0: scales.tau0,
        mesh: Mesh::line(v.len(), dx).map_err(to_py)?,
        v,
        sign,
        scales,
    };
    let n = reduced::steady_state(&cfg, n_ref).map_err(to_py)?;
    let r = reduced::stationarity_residual(&cfg, &n).map_err(to_py)?;
    Ok((n, r))
}

/// Bipolar hyperbolic solver on a periodic grid.
#[pyclass(name = "HydroSolver")]
struct PySolver(solver::HydroSolver);

#[pymethods]
impl PySolver {
    #[new]
    #[pyo3(signature = (nx, dx, n_electrons, n_holes, ny = 1, scales = None, cfl = 0.4, relaxation = true, poisson = false))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        nx: usize,
        dx: f64,
        n_electrons: Vec<f64>,
        n_holes: Vec<f64>,
        ny: usize,
        scales: Option<PyScales>,
        cfl: f64,
        relaxation: bool,
        poisson: bool,
    ) -> PyResult<Self> {
        let mesh = Mesh::new(nx, ny, dx).map_err(to_py)?;
        let mut grid = FieldGrid::uniform(mesh, 1.0, 1.0);
        if n_electrons.len() != mesh.cells() || n_holes.len() != mesh.cells() {
            return Err(PyValueError::new_err(format!(
                "densities must have {} entries",
                mesh.cells()
            )));
        }
        grid.species[0].n = n_electrons;
        grid.species[1].n = n_holes;
        let mut cfg = SolverConfig::new(scales_or_reduced(scales));
        cfg.cfl = cfl;
        cfg.poisson = poisson;
        if !relaxation {
            cfg.tau0 = None;
        }
        solver::HydroSolver::new(grid, cfg).map(PySolver).map_err(to_py)
    }

    #[getter]
    fn time(&self) -> f64 {
        self.0.time
    }

    /// Largest stable time step.
    #[getter]
    fn max_dt(&self) -> f64 {
        self.0.cfg.max_dt(&self.0.grid.mesh)
    }

    fn set_external_potential(&mut self, v: Vec<f64>) -> PyResult<()> {
        self.0.set_external_potential(v).map_err(to_py)
    }

    fn step(&mut self, dt: f64) -> PyResult<()> {
        self.0.step(dt).map(|_| ()).map_err(to_py)
    }

    /// Advances to `t_end`; returns the number of accepted steps.
    fn run_until(&mut self, py: Python<'_>, t_end: f64) -> PyResult<usize> {
        let s = &mut self.0;
        py.allow_threads(|| s.run_until(t_end, |_, _| {})).map_err(to_py)
    }

    /// (n, ux, uy) of species 0 (electrons) or 1 (holes).
    fn fields(&self, species: usize) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let sp = self
            .0
            .grid
            .species
            .get(species)
            .ok_or_else(|| PyValueError::new_err("species must be 0 or 1"))?;
        Ok((sp.n.clone(), sp.ux.clone(), sp.uy.clone()))
    }

    fn potential(&self) -> Vec<f64> {
        self.0.grid.v.clone()
    }

    fn mass(&self, species: usize) -> PyResult<f64> {
        if species > 1 {
            return Err(PyValueError::new_err("species must be 0 or 1"));
        }
        Ok(self.0.grid.mass(species))
    }

    /// Total free energy of both species.
    fn free_energy(&mut self) -> PyResult<f64> {
        self.0.free_energy_report().map(|r| r.total).map_err(to_py)
    }
}

#[pymodule]
#[pyo3(name = "graphene_hydro")]
fn graphene_hydro_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyScales>()?;
    m.add_class::<PyMultipliers>()?;
    m.add_class::<PyTensors>()?;
    m.add_class::<PySolver>()?;
    m.add_function(wrap_pyfunction!(fermi_phi, m)?)?;
    m.add_function(wrap_pyfunction!(fermi_phi_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(kernel, m)?)?;
    m.add_function(wrap_pyfunction!(forward_map, m)?)?;
    m.add_function(wrap_pyfunction!(invert_constraints, m)?)?;
    m.add_function(wrap_pyfunction!(close, m)?)?;
    m.add_function(wrap_pyfunction!(regime_x, m)?)?;
    m.add_function(wrap_pyfunction!(regime_yz, m)?)?;
    m.add_function(wrap_pyfunction!(mobility, m)?)?;
    m.add_function(wrap_pyfunction!(drift_diffusion_steady_state, m)?)?;
    Ok(())
}
