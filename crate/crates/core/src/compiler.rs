//! Compiles a target superposition `sum_n C_n |n>` into a ladder of
//! rectangular pulses, one per transition `|m> -> |m+1>`.
//!
//! Pulse `m` is tuned to `detuning = 2 m kerr` so that only `|m>` and
//! `|m+1>` are degenerate; in the rotating-wave limit it performs an
//! exact two-level rotation by angle `Omega_m tau_m` with
//! `Omega_m = g sqrt(m+1)`. The recursion fixes `|C_m|` through the
//! duration and `arg C_{m+1}` through the phase of pulse `m`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{StateVector, C64, NORM_TOLERANCE};

/// Slack allowed on `|C_m| / r_m <= 1` before the compiler reports corruption.
const RATIO_SLACK: f64 = 1e-12;
/// Slack on the rotation angle `0 <= Omega tau <= pi/2` for externally built sequences.
const ANGLE_SLACK: f64 = 1e-9;

/// Which sign the two-level rotation carries on the transferred amplitude.
///
/// A pulse of angle `theta` and phase `phi` maps `|m>` to
/// `cos(theta)|m> + s i e^{i phi} sin(theta)|m+1>`. `Propagator` (`s = -1`)
/// is literally `exp(-i H tau)` with `phi` the drive phase in `H`.
/// `Reversed` (`s = +1`) uses the opposite sign; its drive phase is `phi + pi`.
/// Compiler and simulator read the convention from the sequence, so either
/// choice yields the same physical state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationConvention {
    #[default]
    Propagator,
    Reversed,
}

impl RotationConvention {
    pub fn sign(self) -> f64 {
        match self {
            RotationConvention::Propagator => -1.0,
            RotationConvention::Reversed => 1.0,
        }
    }

    /// `s i e^{i phi}`: factor multiplying `sin(theta)` on the transferred amplitude.
    pub fn transfer_factor(self, phase: f64) -> C64 {
        C64::new(0.0, self.sign()) * C64::from_polar(1.0, phase)
    }

    /// Drive phase to place in the Hamiltonian for a pulse of phase `phase`.
    pub fn drive_phase(self, phase: f64) -> f64 {
        match self {
            RotationConvention::Propagator => phase,
            RotationConvention::Reversed => phase + PI,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RotationConvention::Propagator => "propagator",
            RotationConvention::Reversed => "reversed",
        }
    }
}

/// Normalized target coefficients `C_0..C_N` with `C_N != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetState {
    coefficients: Vec<C64>,
}

impl TargetState {
    /// Rejects targets whose squared norm deviates from 1 by more than `1e-9`.
    /// Trailing zero coefficients are dropped.
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidDimension("target needs at least one coefficient".into()));
        }
        if coefficients.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidState("target has non-finite coefficients".into()));
        }
        let norm_sq: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Normalization { norm_sq, deficit: 1.0 - norm_sq });
        }
        Ok(Self::strip(coefficients))
    }

    /// Rescales arbitrary nonzero coefficients to unit norm.
    pub fn renormalized(coefficients: Vec<C64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidDimension("target needs at least one coefficient".into()));
        }
        let norm = coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("target has zero norm".into()));
        }
        Self::new(coefficients.into_iter().map(|c| c / norm).collect())
    }

    fn strip(mut coefficients: Vec<C64>) -> Self {
        while coefficients.len() > 1 && coefficients.last().is_some_and(|c| c.norm_sqr() == 0.0) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn vacuum() -> Self {
        Self { coefficients: vec![C64::new(1.0, 0.0)] }
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    /// Highest occupied Fock index `N`.
    pub fn n_max(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// The target as a state vector over `dim >= N+1` levels.
    pub fn to_state(&self, dim: usize) -> Result<StateVector> {
        if dim < self.coefficients.len() {
            return Err(Error::InvalidDimension(format!(
                "target with N = {} needs dim >= {}, got {dim}",
                self.n_max(),
                self.coefficients.len()
            )));
        }
        let mut amps = self.coefficients.clone();
        amps.resize(dim, C64::new(0.0, 0.0));
        Ok(StateVector::normalized(amps).expect("target has unit norm"))
    }

    /// Removes the phase of the first nonzero coefficient, returning the
    /// rotated target and the removed phase.
    pub fn phase_normalized(&self) -> (TargetState, f64) {
        let first = self
            .coefficients
            .iter()
            .find(|c| c.norm_sqr() > 0.0)
            .expect("normalized target has a nonzero coefficient");
        let phase = first.arg();
        let rot = C64::from_polar(1.0, -phase);
        let coefficients = self.coefficients.iter().map(|c| c * rot).collect();
        (TargetState { coefficients }, phase)
    }
}

/// One rectangular pulse addressing `|index> <-> |index+1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub index: usize,
    pub detuning: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub duration: f64,
}

impl Pulse {
    /// `Omega = g sqrt(index + 1)`.
    pub fn rabi_frequency(&self) -> f64 {
        self.amplitude * ((self.index + 1) as f64).sqrt()
    }

    pub fn rotation_angle(&self) -> f64 {
        self.rabi_frequency() * self.duration
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompileRecord {
    pub index: usize,
    /// `r_m = sqrt(1 - sum_{l<m} |C_l|^2)`
    pub residual: f64,
    /// Phase of the `|m>` amplitude before pulse `m` acts.
    pub accumulated_phase: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CompileLog {
    /// Phase removed from the target before compiling.
    pub global_phase: f64,
    pub records: Vec<CompileRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pulses: Vec<Pulse>,
    kerr: f64,
    convention: RotationConvention,
    compile_log: CompileLog,
}

impl PulseSequence {
    /// Assembles a sequence from pulses produced elsewhere (e.g. a report).
    pub fn new(pulses: Vec<Pulse>, kerr: f64, convention: RotationConvention) -> Result<Self> {
        if !(kerr > 0.0) || !kerr.is_finite() {
            return Err(Error::InvalidArgument(format!("kerr must be positive, got {kerr}")));
        }
        for (k, p) in pulses.iter().enumerate() {
            if p.index != k {
                return Err(Error::InvalidArgument(format!("pulse {k} addresses index {}", p.index)));
            }
            let expected = 2.0 * k as f64 * kerr;
            if (p.detuning - expected).abs() > 1e-12 * expected.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "pulse {k} has detuning {}, expected {expected}",
                    p.detuning
                )));
            }
            if !(p.amplitude > 0.0) || !p.amplitude.is_finite() {
                return Err(Error::InvalidArgument(format!("pulse {k} has amplitude {}", p.amplitude)));
            }
            if !(p.duration >= 0.0) || !p.phase.is_finite() {
                return Err(Error::InvalidArgument(format!("pulse {k} has bad duration or phase")));
            }
            if p.rotation_angle() > FRAC_PI_2 + ANGLE_SLACK {
                return Err(Error::InvalidArgument(format!(
                    "pulse {k} rotates by {} > pi/2",
                    p.rotation_angle()
                )));
            }
        }
        Ok(Self { pulses, kerr, convention, compile_log: CompileLog::default() })
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn kerr(&self) -> f64 {
        self.kerr
    }

    pub fn convention(&self) -> RotationConvention {
        self.convention
    }

    pub fn compile_log(&self) -> &CompileLog {
        &self.compile_log
    }

    /// The first `count` pulses.
    pub fn prefix(&self, count: usize) -> PulseSequence {
        let count = count.min(self.pulses.len());
        PulseSequence {
            pulses: self.pulses[..count].to_vec(),
            kerr: self.kerr,
            convention: self.convention,
            compile_log: CompileLog {
                global_phase: self.compile_log.global_phase,
                records: self.compile_log.records.iter().take(count).copied().collect(),
            },
        }
    }

    /// Total duration of the sequence.
    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_phase(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let w = x - two_pi * ((x + PI) / two_pi).floor();
    if w >= PI {
        w - two_pi
    } else {
        w
    }
}

/// Compiles `target` with drive amplitude `g` and Kerr strength `kerr`
/// using the default rotation convention.
pub fn compile(target: &TargetState, g: f64, kerr: f64) -> Result<PulseSequence> {
    compile_with(target, g, kerr, RotationConvention::default())
}

pub fn compile_with(
    target: &TargetState,
    g: f64,
    kerr: f64,
    convention: RotationConvention,
) -> Result<PulseSequence> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InvalidArgument(format!("drive amplitude must be positive, got {g}")));
    }
    if !(kerr > 0.0) || !kerr.is_finite() {
        return Err(Error::InvalidArgument(format!("kerr must be positive, got {kerr}")));
    }
    let (canonical, global_phase) = target.phase_normalized();
    let coeffs = canonical.coefficients();
    let n_max = canonical.n_max();

    // r_m from the tail sum: equal to sqrt(1 - sum_{l<m}|C_l|^2) for a
    // normalized target, without the cancellation near r_m -> 0.
    let mut residuals = vec![0.0; n_max + 1];
    let mut tail = 0.0;
    for m in (0..=n_max).rev() {
        tail += coeffs[m].norm_sqr();
        residuals[m] = tail.sqrt();
    }

    let step = convention.sign() * FRAC_PI_2;
    let mut theta = 0.0;
    let mut pulses = Vec::with_capacity(n_max);
    let mut records = Vec::with_capacity(n_max);
    for m in 0..n_max {
        let r = residuals[m];
        if !(r > 0.0) {
            return Err(Error::InternalConsistency(format!("residual exhausted before pulse {m}")));
        }
        let ratio = coeffs[m].norm() / r;
        if ratio > 1.0 + RATIO_SLACK {
            return Err(Error::InternalConsistency(format!("|C_{m}| / r_{m} = {ratio} exceeds 1")));
        }
        let omega = g * ((m + 1) as f64).sqrt();
        let duration = ratio.min(1.0).acos() / omega;

        let next = coeffs[m + 1];
        let phase = if next.norm_sqr() == 0.0 { 0.0 } else { wrap_phase(next.arg() - theta - step) };

        records.push(CompileRecord { index: m, residual: r, accumulated_phase: theta });
        pulses.push(Pulse { index: m, detuning: 2.0 * m as f64 * kerr, amplitude: g, phase, duration });
        theta = wrap_phase(theta + step + phase);
    }

    Ok(PulseSequence { pulses, kerr, convention, compile_log: CompileLog { global_phase, records } })
}

/// Closed-form state produced by `seq` from vacuum in the rotating-wave
/// limit, without any matrix propagation.
pub fn decompile_check(seq: &PulseSequence) -> TargetState {
    let mut coefficients = Vec::with_capacity(seq.len() + 1);
    let mut carried = C64::new(1.0, 0.0);
    for pulse in seq.pulses() {
        let angle = pulse.rotation_angle();
        coefficients.push(carried * angle.cos());
        carried *= seq.convention().transfer_factor(pulse.phase) * angle.sin();
    }
    coefficients.push(carried);
    TargetState::strip(coefficients)
}
