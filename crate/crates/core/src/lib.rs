//! Synthesis of arbitrary cavity Fock-state superpositions with a ladder
//! of Kerr-resolved laser pulses, and verification of the resulting
//! sequences by simulation.
//!
//! * [`fock`]: truncated-Fock-space states, the driven Kerr Hamiltonian,
//!   propagators and fidelity.
//! * [`compiler`]: target superposition to pulse sequence, and the
//!   closed-form inverse.
//! * [`simulator`]: rotating-wave and full-Hamiltonian propagation.
//! * [`decoherence`]: the same sequence under photon loss.
//! * [`job`]: job documents and reports used by the `kerrfock` binary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compiler;
pub mod decoherence;
pub mod error;
pub mod fock;
pub mod job;
pub mod simulator;

pub use compiler::{compile, compile_with, decompile_check, Pulse, PulseSequence, RotationConvention, TargetState};
pub use decoherence::{evolve_lindblad_sequence, lindblad_propagate, LindbladReport, LossConfig};
pub use error::{Error, Result};
pub use fock::{
    build_hamiltonian, fidelity, kerr_phase_compensation, propagate_const, propagator, DensityMatrix,
    HamiltonianParams, StateVector, C64, CMatrix,
};
pub use job::{parse_jobspec, parse_jobspec_with, run_job, JobOutput, JobOverrides, JobSpec, Mode};
pub use simulator::{
    evolve_full_sequence, evolve_rwa_pulse, evolve_rwa_sequence, rwa_error_sweep, SimConfig, SimReport, SweepRow,
};
