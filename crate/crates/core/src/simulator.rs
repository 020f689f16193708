//! Propagation of compiled pulse sequences.
//!
//! Two routes are provided: the rotating-wave route applies each pulse as
//! an exact two-level rotation, and the full route exponentiates the whole
//! driven Kerr Hamiltonian over `N + 1 + guard` levels. After each full
//! pulse the free Kerr phases of that pulse's frame are removed so the
//! state is directly comparable with the rotating-wave coefficients.

use rayon::prelude::*;
use serde::Serialize;

use crate::compiler::{compile_with, decompile_check, Pulse, PulseSequence, RotationConvention, TargetState};
use crate::error::{Error, Result};
use crate::fock::{
    build_hamiltonian, fidelity, kerr_phase_compensation, propagator, HamiltonianParams, StateVector, C64,
};

pub const DEFAULT_GUARD: usize = 10;
/// Leakage above which a report carries a truncation warning.
pub const LEAKAGE_WARNING: f64 = 0.01;
/// Allowed drift of the squared norm along a unitary chain.
const UNITARY_NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Extra Fock levels above the target's highest index.
    pub guard: usize,
    pub kerr: f64,
    pub record_trajectory: bool,
    /// Sample points per pulse, endpoints included.
    pub trajectory_samples: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { guard: DEFAULT_GUARD, kerr: 1.0, record_trajectory: false, trajectory_samples: 2 }
    }
}

impl SimConfig {
    pub fn with_guard(guard: usize) -> Self {
        Self { guard, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kerr > 0.0) || !self.kerr.is_finite() {
            return Err(Error::InvalidArgument(format!("kerr must be positive, got {}", self.kerr)));
        }
        if self.record_trajectory && self.trajectory_samples < 2 {
            return Err(Error::InvalidArgument("trajectory_samples must be >= 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub pulse_index: usize,
    pub state: StateVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub final_state: StateVector,
    pub fidelity_vs_target: f64,
    /// Population above the target's highest Fock index.
    pub leakage: f64,
    /// Fidelity after pulse `m` against the ideal intermediate state.
    pub per_pulse_fidelity: Vec<f64>,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    pub truncation_warning: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub infidelity: f64,
    pub leakage: f64,
}

/// Exact two-level rotation of `pulse` on the `(|i>, |i+1>)` subspace.
pub fn evolve_rwa_pulse(state: &StateVector, pulse: &Pulse, convention: RotationConvention) -> Result<StateVector> {
    let i = pulse.index;
    if state.dim() <= i + 1 {
        return Err(Error::InvalidDimension(format!(
            "pulse on |{i}> <-> |{}> needs dim > {}, got {}",
            i + 1,
            i + 1,
            state.dim()
        )));
    }
    let angle = pulse.rotation_angle();
    let (s, c) = angle.sin_cos();
    let t = convention.transfer_factor(pulse.phase);
    let mut amps = state.amplitudes().to_vec();
    let (lo, hi) = (amps[i], amps[i + 1]);
    amps[i] = lo * c - t.conj() * s * hi;
    amps[i + 1] = t * s * lo + hi * c;
    Ok(StateVector::from_vector(nalgebra::DVector::from_vec(amps)))
}

/// Applies the rotating-wave pulses of `seq` to vacuum in `dim` levels.
pub fn evolve_rwa_sequence(seq: &PulseSequence, dim: usize) -> Result<StateVector> {
    if dim < seq.len() + 1 {
        return Err(Error::InvalidDimension(format!(
            "{} pulses need dim >= {}, got {dim}",
            seq.len(),
            seq.len() + 1
        )));
    }
    seq.pulses()
        .iter()
        .try_fold(StateVector::vacuum(dim)?, |psi, p| evolve_rwa_pulse(&psi, p, seq.convention()))
}

fn pulse_hamiltonian(pulse: &Pulse, convention: RotationConvention, kerr: f64, dim: usize) -> Result<nalgebra::DMatrix<C64>> {
    build_hamiltonian(&HamiltonianParams {
        detuning: pulse.detuning,
        kerr,
        amplitude: pulse.amplitude,
        phase: convention.drive_phase(pulse.phase),
        dim,
    })
}

fn check_norm(psi: &StateVector, m: usize) -> Result<()> {
    let drift = (psi.norm_sqr() - 1.0).abs();
    if drift > UNITARY_NORM_TOLERANCE {
        return Err(Error::ContractViolation(format!("norm drift {drift:e} after pulse {m}")));
    }
    Ok(())
}

/// Simulation dimension `N + 1 + guard`, large enough for every pulse.
pub fn simulation_dim(seq: &PulseSequence, target: &TargetState, guard: usize) -> usize {
    target.n_max().max(seq.len()) + 1 + guard
}

/// Runs `seq` under the full driven Kerr Hamiltonian from vacuum.
pub fn evolve_full_sequence(seq: &PulseSequence, config: &SimConfig, target: &TargetState) -> Result<SimReport> {
    config.validate()?;
    let dim = simulation_dim(seq, target, config.guard);
    let conv = seq.convention();

    let mut psi = StateVector::vacuum(dim)?;
    let mut per_pulse_fidelity = Vec::with_capacity(seq.len());
    let mut trajectory = config.record_trajectory.then(Vec::new);
    let mut elapsed = 0.0;

    for (m, pulse) in seq.pulses().iter().enumerate() {
        let h = pulse_hamiltonian(pulse, conv, config.kerr, dim)?;

        if let Some(points) = trajectory.as_mut() {
            let samples = config.trajectory_samples;
            // the endpoint of pulse m is the start of pulse m+1; keep both
            for k in 0..samples {
                let t = pulse.duration * k as f64 / (samples - 1) as f64;
                let u = propagator(&h, t)?;
                let lab = StateVector::from_vector(u * psi.as_vector());
                let state = lab.apply_diagonal(&kerr_phase_compensation(m, config.kerr, t, dim))?;
                points.push(TrajectoryPoint { time: elapsed + t, pulse_index: m, state });
            }
        }

        let u = propagator(&h, pulse.duration)?;
        let lab = StateVector::from_vector(u * psi.as_vector());
        psi = lab.apply_diagonal(&kerr_phase_compensation(m, config.kerr, pulse.duration, dim))?;
        check_norm(&psi, m)?;
        elapsed += pulse.duration;

        let ideal = decompile_check(&seq.prefix(m + 1)).to_state(dim)?;
        per_pulse_fidelity.push(fidelity(&psi, &ideal)?);
    }

    let fidelity_vs_target = fidelity(&psi, &target.to_state(dim)?)?;
    let leakage = psi.population_above(target.n_max()).clamp(0.0, 1.0);
    Ok(SimReport {
        final_state: psi,
        fidelity_vs_target,
        leakage,
        per_pulse_fidelity,
        trajectory,
        truncation_warning: leakage > LEAKAGE_WARNING,
    })
}

/// Compiles and simulates `target` once per drive ratio `g / kerr`.
/// Rows come back in the order of `ratios`.
pub fn rwa_error_sweep(target: &TargetState, ratios: &[f64], config: &SimConfig) -> Result<Vec<SweepRow>> {
    rwa_error_sweep_with(target, ratios, config, RotationConvention::default())
}

pub fn rwa_error_sweep_with(
    target: &TargetState,
    ratios: &[f64],
    config: &SimConfig,
    convention: RotationConvention,
) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if let Some(bad) = ratios.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidArgument(format!("sweep ratios must be positive, got {bad}")));
    }
    if ratios.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sweep ratios must be sorted ascending".into()));
    }
    ratios
        .par_iter()
        .map(|&ratio| {
            let seq = compile_with(target, ratio * config.kerr, config.kerr, convention)?;
            let report = evolve_full_sequence(&seq, config, target)?;
            Ok(SweepRow {
                ratio,
                infidelity: (1.0 - report.fidelity_vs_target).max(0.0),
                leakage: report.leakage,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn half_flop(index: usize) -> Pulse {
        let g = 0.3;
        Pulse {
            index,
            detuning: 2.0 * index as f64,
            amplitude: g,
            phase: 0.0,
            duration: FRAC_PI_2 / (g * ((index + 1) as f64).sqrt()),
        }
    }

    #[test]
    fn rwa_flop_from_vacuum() {
        let psi = StateVector::vacuum(3).unwrap();
        let out = evolve_rwa_pulse(&psi, &half_flop(0), RotationConvention::Reversed).unwrap();
        assert_abs_diff_eq!((out.amplitudes()[1] - c(0.0, 1.0)).norm(), 0.0, epsilon = 1e-15);
        let out = evolve_rwa_pulse(&psi, &half_flop(0), RotationConvention::Propagator).unwrap();
        assert_abs_diff_eq!((out.amplitudes()[1] - c(0.0, -1.0)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rwa_pulse_leaves_other_levels() {
        let psi = StateVector::fock(2, 4).unwrap();
        let out = evolve_rwa_pulse(&psi, &half_flop(0), RotationConvention::Propagator).unwrap();
        assert_eq!(out, psi);
        let mut p = half_flop(1);
        p.duration = 0.0;
        let psi = StateVector::normalized(vec![c(0.3, 0.1), c(0.5, -0.2), c(0.1, 0.7)]).unwrap();
        assert_eq!(evolve_rwa_pulse(&psi, &p, RotationConvention::Propagator).unwrap(), psi);
    }

    #[test]
    fn rwa_pulse_dimension_check() {
        let psi = StateVector::vacuum(2).unwrap();
        assert!(matches!(
            evolve_rwa_pulse(&psi, &half_flop(1), RotationConvention::Propagator),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn rwa_pulse_matches_two_level_exponential() {
        // the propagator convention is exp(-i H tau) on the driven pair
        let p = Pulse { index: 0, detuning: 0.0, amplitude: 0.4, phase: 0.9, duration: 1.3 };
        let psi = StateVector::normalized(vec![c(0.6, 0.2), c(-0.1, 0.7)]).unwrap();
        let rwa = evolve_rwa_pulse(&psi, &p, RotationConvention::Propagator).unwrap();
        let h = build_hamiltonian(&HamiltonianParams {
            detuning: 0.0,
            kerr: 1.0,
            amplitude: 0.4,
            phase: 0.9,
            dim: 2,
        })
        .unwrap();
        let exact = crate::fock::propagate_const(&psi, &h, 1.3).unwrap();
        for (a, b) in rwa.amplitudes().iter().zip(exact.amplitudes()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn rwa_sequence_reaches_target() {
        let t = TargetState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let seq = compile(&t, 0.01, 1.0).unwrap();
        let out = evolve_rwa_sequence(&seq, 2).unwrap();
        assert!(fidelity(&out, &t.to_state(2).unwrap()).unwrap() > 1.0 - 1e-12);

        let fock3 = TargetState::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let seq = compile(&fock3, 0.01, 1.0).unwrap();
        assert_eq!(seq.len(), 3);
        let out = evolve_rwa_sequence(&seq, 6).unwrap();
        assert!(fidelity(&out, &fock3.to_state(6).unwrap()).unwrap() > 1.0 - 1e-12);

        let empty = compile(&TargetState::vacuum(), 0.1, 1.0).unwrap();
        assert_eq!(evolve_rwa_sequence(&empty, 3).unwrap(), StateVector::vacuum(3).unwrap());
        assert!(evolve_rwa_sequence(&seq, 3).is_err());
    }

    #[test]
    fn full_sequence_vacuum_target() {
        let t = TargetState::vacuum();
        let seq = compile(&t, 0.1, 1.0).unwrap();
        let report = evolve_full_sequence(&seq, &SimConfig::default(), &t).unwrap();
        assert_eq!(report.fidelity_vs_target, 1.0);
        assert_eq!(report.leakage, 0.0);
        assert!(report.per_pulse_fidelity.is_empty());
        assert!(!report.truncation_warning);
    }

    #[test]
    fn full_sequence_weak_drive() {
        let t = TargetState::new(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]).unwrap();
        let weak = evolve_full_sequence(&compile(&t, 1e-3, 1.0).unwrap(), &SimConfig::default(), &t).unwrap();
        assert!(weak.fidelity_vs_target >= 1.0 - 1e-4, "{}", weak.fidelity_vs_target);
        assert_eq!(weak.final_state.dim(), 12);
        let strong = evolve_full_sequence(&compile(&t, 0.3, 1.0).unwrap(), &SimConfig::default(), &t).unwrap();
        assert!(weak.fidelity_vs_target > strong.fidelity_vs_target);
    }

    #[test]
    fn trajectory_endpoints_match_pulse_boundaries() {
        let t = TargetState::renormalized(vec![c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.5)]).unwrap();
        let seq = compile(&t, 5e-3, 1.0).unwrap();
        let config = SimConfig { record_trajectory: true, trajectory_samples: 5, ..SimConfig::with_guard(4) };
        let report = evolve_full_sequence(&seq, &config, &t).unwrap();
        let traj = report.trajectory.as_ref().unwrap();
        assert_eq!(traj.len(), 10);
        assert_eq!(traj[0].time, 0.0);
        let last = traj.last().unwrap();
        assert_abs_diff_eq!(last.time, seq.total_duration(), epsilon = 1e-9);
        assert_abs_diff_eq!(fidelity(&last.state, &report.final_state).unwrap(), 1.0, epsilon = 1e-12);
        for (m, f) in report.per_pulse_fidelity.iter().enumerate() {
            let end = &traj[(m + 1) * 5 - 1];
            let ideal = decompile_check(&seq.prefix(m + 1)).to_state(end.state.dim()).unwrap();
            let traj_f = fidelity(&end.state, &ideal).unwrap();
            assert_abs_diff_eq!(traj_f, *f, epsilon = 1e-10);
            assert!(traj_f > 1.0 - 1e-3);
        }
    }

    #[test]
    fn sweep_validates_ratios() {
        let t = TargetState::vacuum();
        let cfg = SimConfig::default();
        assert!(rwa_error_sweep(&t, &[0.1, 0.01], &cfg).is_err());
        assert!(rwa_error_sweep(&t, &[0.0], &cfg).is_err());
        let rows = rwa_error_sweep(&t, &[1e-3, 1e-2, 1e-1], &cfg).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.infidelity == 0.0 && r.leakage == 0.0));
        assert_eq!(rows[1].ratio, 1e-2);
    }

    #[test]
    fn bad_config_is_rejected() {
        let t = TargetState::vacuum();
        let seq = compile(&t, 0.1, 1.0).unwrap();
        let cfg = SimConfig { record_trajectory: true, trajectory_samples: 1, ..SimConfig::default() };
        assert!(evolve_full_sequence(&seq, &cfg, &t).is_err());
        let cfg = SimConfig { kerr: 0.0, ..SimConfig::default() };
        assert!(evolve_full_sequence(&seq, &cfg, &t).is_err());
    }
}
