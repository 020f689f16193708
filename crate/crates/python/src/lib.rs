//! Python bindings for `kerrfock`.
//!
//! Coefficients and amplitudes cross the boundary as Python `complex`;
//! matrices as lists of rows. Library errors surface as `ValueError`.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use kerrfock::{CMatrix, RotationConvention, StateVector};

fn to_py(e: kerrfock::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_convention(name: &str) -> PyResult<RotationConvention> {
    match name {
        "propagator" => Ok(RotationConvention::Propagator),
        "reversed" => Ok(RotationConvention::Reversed),
        other => Err(PyValueError::new_err(format!(
            "unknown convention {other:?} (expected \"propagator\" or \"reversed\")"
        ))),
    }
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let dim = rows.len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Normalized target superposition `sum_n c_n |n>`.
#[pyclass(name = "TargetState", module = "pykerrfock", from_py_object)]
#[derive(Clone)]
struct PyTargetState {
    inner: kerrfock::TargetState,
}

#[pymethods]
impl PyTargetState {
    #[new]
    #[pyo3(signature = (coefficients, renormalize = false))]
    fn new(coefficients: Vec<Complex64>, renormalize: bool) -> PyResult<Self> {
        let inner = if renormalize {
            kerrfock::TargetState::renormalized(coefficients)
        } else {
            kerrfock::TargetState::new(coefficients)
        }
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn coefficients(&self) -> Vec<Complex64> {
        self.inner.coefficients().to_vec()
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    fn __repr__(&self) -> String {
        format!("TargetState(n_max={})", self.inner.n_max())
    }
}

#[pyclass(name = "Pulse", module = "pykerrfock", frozen, skip_from_py_object)]
struct PyPulse {
    #[pyo3(get)]
    index: usize,
    #[pyo3(get)]
    detuning: f64,
    #[pyo3(get)]
    amplitude: f64,
    #[pyo3(get)]
    phase: f64,
    #[pyo3(get)]
    duration: f64,
}

#[pymethods]
impl PyPulse {
    fn __repr__(&self) -> String {
        format!(
            "Pulse(index={}, detuning={}, amplitude={}, phase={}, duration={})",
            self.index, self.detuning, self.amplitude, self.phase, self.duration
        )
    }
}

#[pyclass(name = "PulseSequence", module = "pykerrfock", from_py_object)]
#[derive(Clone)]
struct PyPulseSequence {
    inner: kerrfock::PulseSequence,
}

#[pymethods]
impl PyPulseSequence {
    #[getter]
    fn pulses(&self) -> Vec<PyPulse> {
        self.inner
            .pulses()
            .iter()
            .map(|p| PyPulse {
                index: p.index,
                detuning: p.detuning,
                amplitude: p.amplitude,
                phase: p.phase,
                duration: p.duration,
            })
            .collect()
    }

    #[getter]
    fn kerr(&self) -> f64 {
        self.inner.kerr()
    }

    #[getter]
    fn convention(&self) -> &'static str {
        self.inner.convention().as_str()
    }

    #[getter]
    fn global_phase(&self) -> f64 {
        self.inner.compile_log().global_phase
    }

    #[getter]
    fn total_duration(&self) -> f64 {
        self.inner.total_duration()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("PulseSequence(len={}, kerr={})", self.inner.len(), self.inner.kerr())
    }
}

#[pyclass(name = "SimReport", module = "pykerrfock", frozen, skip_from_py_object)]
struct PySimReport {
    #[pyo3(get)]
    fidelity: f64,
    #[pyo3(get)]
    leakage: f64,
    #[pyo3(get)]
    per_pulse_fidelity: Vec<f64>,
    #[pyo3(get)]
    truncation_warning: bool,
    /// Final amplitudes (pure runs) or populations (lossy runs).
    #[pyo3(get)]
    final_state: Vec<Complex64>,
    #[pyo3(get)]
    trace_drift: Option<f64>,
}

#[pyfunction]
#[pyo3(signature = (target, g, kerr = 1.0, convention = "propagator"))]
fn compile(target: &PyTargetState, g: f64, kerr: f64, convention: &str) -> PyResult<PyPulseSequence> {
    let inner = kerrfock::compile_with(&target.inner, g, kerr, parse_convention(convention)?).map_err(to_py)?;
    Ok(PyPulseSequence { inner })
}

#[pyfunction]
fn decompile_check(seq: &PyPulseSequence) -> PyTargetState {
    PyTargetState { inner: kerrfock::decompile_check(&seq.inner) }
}

#[pyfunction]
fn build_hamiltonian(detuning: f64, kerr: f64, amplitude: f64, phase: f64, dim: usize) -> PyResult<Vec<Vec<Complex64>>> {
    let h = kerrfock::build_hamiltonian(&kerrfock::HamiltonianParams { detuning, kerr, amplitude, phase, dim })
        .map_err(to_py)?;
    Ok(matrix_to_rows(&h))
}

#[pyfunction]
fn propagate_const(state: Vec<Complex64>, hamiltonian: Vec<Vec<Complex64>>, duration: f64) -> PyResult<Vec<Complex64>> {
    let psi = StateVector::new(state).map_err(to_py)?;
    let h = matrix_from_rows(hamiltonian)?;
    Ok(kerrfock::propagate_const(&psi, &h, duration).map_err(to_py)?.amplitudes().to_vec())
}

#[pyfunction]
fn fidelity(a: Vec<Complex64>, b: Vec<Complex64>) -> PyResult<f64> {
    let a = StateVector::normalized(a).map_err(to_py)?;
    let b = StateVector::normalized(b).map_err(to_py)?;
    kerrfock::fidelity(&a, &b).map_err(to_py)
}

#[pyfunction]
fn kerr_phase_compensation(pulse_index: usize, kerr: f64, duration: f64, dim: usize) -> Vec<Complex64> {
    kerrfock::kerr_phase_compensation(pulse_index, kerr, duration, dim)
}

#[pyfunction]
fn evolve_rwa_sequence(seq: &PyPulseSequence, dim: usize) -> PyResult<Vec<Complex64>> {
    Ok(kerrfock::evolve_rwa_sequence(&seq.inner, dim).map_err(to_py)?.amplitudes().to_vec())
}

#[pyfunction]
#[pyo3(signature = (seq, target, guard = 10, kerr = 1.0))]
fn evolve_full_sequence(seq: &PyPulseSequence, target: &PyTargetState, guard: usize, kerr: f64) -> PyResult<PySimReport> {
    let config = kerrfock::SimConfig { guard, kerr, ..Default::default() };
    let r = kerrfock::evolve_full_sequence(&seq.inner, &config, &target.inner).map_err(to_py)?;
    Ok(PySimReport {
        fidelity: r.fidelity_vs_target,
        leakage: r.leakage,
        per_pulse_fidelity: r.per_pulse_fidelity,
        truncation_warning: r.truncation_warning,
        final_state: r.final_state.amplitudes().to_vec(),
        trace_drift: None,
    })
}

#[pyfunction]
#[pyo3(signature = (seq, target, kappa, steps_per_pulse = 20_000, guard = 10, kerr = 1.0))]
fn evolve_lindblad_sequence(
    seq: &PyPulseSequence,
    target: &PyTargetState,
    kappa: f64,
    steps_per_pulse: usize,
    guard: usize,
    kerr: f64,
) -> PyResult<PySimReport> {
    let config = kerrfock::SimConfig { guard, kerr, ..Default::default() };
    let loss = kerrfock::LossConfig { kappa, steps_per_pulse };
    let r = kerrfock::evolve_lindblad_sequence(&seq.inner, &config, &loss, &target.inner).map_err(to_py)?;
    let populations = (0..r.final_state.dim())
        .map(|n| Complex64::new(r.final_state.population(n), 0.0))
        .collect();
    Ok(PySimReport {
        fidelity: r.fidelity_vs_target,
        leakage: r.leakage,
        per_pulse_fidelity: r.per_pulse_fidelity,
        truncation_warning: r.truncation_warning,
        final_state: populations,
        trace_drift: Some(r.trace_drift),
    })
}

/// Returns `(ratio, infidelity, leakage)` rows.
#[pyfunction]
#[pyo3(signature = (target, ratios, guard = 10))]
fn rwa_error_sweep(target: &PyTargetState, ratios: Vec<f64>, guard: usize) -> PyResult<Vec<(f64, f64, f64)>> {
    let rows = kerrfock::rwa_error_sweep(&target.inner, &ratios, &kerrfock::SimConfig::with_guard(guard))
        .map_err(to_py)?;
    Ok(rows.iter().map(|r| (r.ratio, r.infidelity, r.leakage)).collect())
}

/// Runs a JSON job document; returns `(report, sweep_csv)`.
#[pyfunction]
fn run_job(text: &str) -> PyResult<(String, Option<String>)> {
    let spec = kerrfock::parse_jobspec(text).map_err(to_py)?;
    let out = kerrfock::run_job(&spec).map_err(to_py)?;
    Ok((out.report, out.sweep_csv))
}

#[pymodule]
fn pykerrfock(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTargetState>()?;
    m.add_class::<PyPulse>()?;
    m.add_class::<PyPulseSequence>()?;
    m.add_class::<PySimReport>()?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(decompile_check, m)?)?;
    m.add_function(wrap_pyfunction!(build_hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(propagate_const, m)?)?;
    m.add_function(wrap_pyfunction!(fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(kerr_phase_compensation, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_rwa_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_full_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_lindblad_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(rwa_error_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(run_job, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
