//! Photon loss during the pulse sequence.
//!
//! Integrates `d rho/dt = -i[H, rho] + kappa (a rho a^dag - {a^dag a, rho}/2)`
//! with fixed-step classical Runge-Kutta, one constant `H` per pulse.

use crate::compiler::{decompile_check, PulseSequence, TargetState};
use crate::error::{Error, Result};
use crate::fock::{
    annihilation, build_hamiltonian, hermiticity_error, kerr_phase_compensation, CMatrix, DensityMatrix,
    HamiltonianParams, StateVector, C64, HERMITIAN_TOLERANCE,
};
use crate::simulator::{simulation_dim, SimConfig, LEAKAGE_WARNING};

/// Largest accepted `|tr(rho) - 1|` along an integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
pub const MIN_STEPS_PER_PULSE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Energy decay rate, in units of the Kerr strength.
    pub kappa: f64,
    pub steps_per_pulse: usize,
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidArgument(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if self.steps_per_pulse < MIN_STEPS_PER_PULSE {
            return Err(Error::InvalidArgument(format!(
                "steps_per_pulse must be >= {MIN_STEPS_PER_PULSE}, got {}",
                self.steps_per_pulse
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladReport {
    pub final_state: DensityMatrix,
    /// `<target|rho|target>`
    pub fidelity_vs_target: f64,
    pub leakage: f64,
    pub per_pulse_fidelity: Vec<f64>,
    /// Largest `|tr(rho) - 1|` seen at any step.
    pub trace_drift: f64,
    pub purity: f64,
    pub truncation_warning: bool,
}

struct Generator<'a> {
    h: &'a CMatrix,
    a: CMatrix,
    a_dag: CMatrix,
    number: Vec<f64>,
    kappa: f64,
}

impl<'a> Generator<'a> {
    fn new(h: &'a CMatrix, kappa: f64) -> Self {
        let dim = h.nrows();
        let a = annihilation(dim);
        let a_dag = a.adjoint();
        Self { h, a, a_dag, number: (0..dim).map(|n| n as f64).collect(), kappa }
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let minus_i = C64::new(0.0, -1.0);
        let mut out = (self.h * rho - rho * self.h) * minus_i;
        if self.kappa > 0.0 {
            let jump = &self.a * rho * &self.a_dag;
            let dim = rho.nrows();
            for j in 0..dim {
                for i in 0..dim {
                    let anti = 0.5 * (self.number[i] + self.number[j]);
                    out[(i, j)] += (jump[(i, j)] - rho[(i, j)] * anti) * self.kappa;
                }
            }
        }
        out
    }

    /// One classical RK4 step.
    fn step(&self, rho: &CMatrix, dt: f64) -> CMatrix {
        let half = C64::new(0.5 * dt, 0.0);
        let full = C64::new(dt, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * full));
        rho + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
    }
}

fn trace_of(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|c| c.re).sum()
}

/// Integrates the loss master equation for `duration` under constant `h`.
/// Returns the evolved state and the largest trace drift seen.
pub fn lindblad_propagate(
    rho: &DensityMatrix,
    h: &CMatrix,
    kappa: f64,
    duration: f64,
    steps: usize,
) -> Result<(DensityMatrix, f64)> {
    if h.nrows() != rho.dim() || !h.is_square() {
        return Err(Error::InvalidDimension(format!(
            "density matrix has dim {}, hamiltonian is {}x{}",
            rho.dim(),
            h.nrows(),
            h.ncols()
        )));
    }
    let herm = hermiticity_error(h);
    if herm > HERMITIAN_TOLERANCE {
        return Err(Error::ContractViolation(format!("hamiltonian is not hermitian (max deviation {herm:e})")));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidArgument(format!("duration must be >= 0, got {duration}")));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa must be >= 0, got {kappa}")));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let mut drift = (rho.trace() - 1.0).abs();
    if duration == 0.0 {
        return Ok((rho.clone(), drift));
    }
    let generator = Generator::new(h, kappa);
    let dt = duration / steps as f64;
    let mut m = rho.entries().clone();
    for _ in 0..steps {
        m = generator.step(&m, dt);
        drift = drift.max((trace_of(&m) - 1.0).abs());
    }
    // RK4 keeps hermiticity only up to rounding
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    Ok((DensityMatrix::from_matrix(m), drift))
}

/// Runs `seq` from vacuum with photon loss at rate `loss.kappa`.
pub fn evolve_lindblad_sequence(
    seq: &PulseSequence,
    config: &SimConfig,
    loss: &LossConfig,
    target: &TargetState,
) -> Result<LindbladReport> {
    config.validate()?;
    loss.validate()?;
    let dim = simulation_dim(seq, target, config.guard);
    let conv = seq.convention();

    let mut rho = DensityMatrix::from_pure(&StateVector::vacuum(dim)?);
    let mut per_pulse_fidelity = Vec::with_capacity(seq.len());
    let mut trace_drift = 0.0f64;

    for (m, pulse) in seq.pulses().iter().enumerate() {
        let h = build_hamiltonian(&HamiltonianParams {
            detuning: pulse.detuning,
            kerr: config.kerr,
            amplitude: pulse.amplitude,
            phase: conv.drive_phase(pulse.phase),
            dim,
        })?;
        let (evolved, drift) = lindblad_propagate(&rho, &h, loss.kappa, pulse.duration, loss.steps_per_pulse)?;
        trace_drift = trace_drift.max(drift);
        if trace_drift > TRACE_DRIFT_LIMIT {
            return Err(Error::IntegrationResolution(format!(
                "trace drift {trace_drift:e} during pulse {m}; increase steps_per_pulse (now {})",
                loss.steps_per_pulse
            )));
        }
        rho = evolved.sandwich_diagonal(&kerr_phase_compensation(m, config.kerr, pulse.duration, dim))?;

        let ideal = decompile_check(&seq.prefix(m + 1)).to_state(dim)?;
        per_pulse_fidelity.push(rho.expectation(&ideal).clamp(0.0, 1.0));
    }

    let fidelity_vs_target = rho.expectation(&target.to_state(dim)?).clamp(0.0, 1.0);
    let leakage = rho.population_above(target.n_max()).clamp(0.0, 1.0);
    Ok(LindbladReport {
        purity: rho.purity(),
        final_state: rho,
        fidelity_vs_target,
        leakage,
        per_pulse_fidelity,
        trace_drift,
        truncation_warning: leakage > LEAKAGE_WARNING,
    })
}
