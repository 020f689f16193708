//! Truncated Fock-space numerics: states, operators, the driven Kerr
//! Hamiltonian and its piecewise-constant propagator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Tolerance on `sum |c_n|^2 - 1` accepted when constructing a state.
pub const NORM_TOLERANCE: f64 = 1e-9;
/// Elementwise tolerance for `H == H^dagger`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Pure state over the truncated basis `|0>, ..., |dim-1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Builds a state from amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension("state needs at least one level".into()));
        }
        let state = Self { amplitudes: DVector::from_vec(amplitudes) };
        let norm_sq = state.norm_sqr();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("norm^2 = {norm_sq}, expected 1")));
        }
        Ok(state)
    }

    /// Builds a state by rescaling arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension("state needs at least one level".into()));
        }
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero-norm state".into()));
        }
        Ok(Self { amplitudes: v.unscale(norm) })
    }

    pub(crate) fn from_vector(amplitudes: DVector<C64>) -> Self {
        debug_assert!(!amplitudes.is_empty());
        Self { amplitudes }
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::fock(0, dim)
    }

    /// Number state `|n>` embedded in `dim` levels.
    pub fn fock(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidDimension(format!("|{n}> does not fit in {dim} levels")));
        }
        let mut v = DVector::zeros(dim);
        v[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn population(&self, n: usize) -> f64 {
        self.amplitudes.get(n).map_or(0.0, |c| c.norm_sqr())
    }

    /// Total population in levels strictly above `n_max`.
    pub fn population_above(&self, n_max: usize) -> f64 {
        self.amplitudes.iter().skip(n_max + 1).map(|c| c.norm_sqr()).sum()
    }

    /// Zero-pads (or truncates, if smaller) to `dim` levels.
    pub fn embed(&self, dim: usize) -> Self {
        let mut v = DVector::zeros(dim);
        for (dst, src) in v.iter_mut().zip(self.amplitudes.iter()) {
            *dst = *src;
        }
        Self { amplitudes: v }
    }

    /// Multiplies amplitude `n` by `phases[n]`.
    pub fn apply_diagonal(&self, phases: &[C64]) -> Result<Self> {
        if phases.len() != self.dim() {
            return Err(Error::InvalidDimension(format!(
                "diagonal of length {} applied to state of dim {}",
                phases.len(),
                self.dim()
            )));
        }
        let v = self.amplitudes.zip_map(&DVector::from_column_slice(phases), |a, p| a * p);
        Ok(Self { amplitudes: v })
    }

    /// `<self|other>`, with the shorter state zero-padded.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Mixed state as a dense `dim x dim` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity before accepting `entries`.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() == 0 || !entries.is_square() {
            return Err(Error::InvalidDimension(format!(
                "density matrix must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let rho = Self { entries };
        let herm = hermiticity_error(&rho.entries);
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidState(format!("not hermitian (max deviation {herm:e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr}, expected 1")));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_matrix(entries: CMatrix) -> Self {
        Self { entries }
    }

    /// `|psi><psi|`.
    pub fn from_pure(state: &StateVector) -> Self {
        let v = state.as_vector();
        Self { entries: v * v.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for hermitian rho
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn population(&self, n: usize) -> f64 {
        if n < self.dim() {
            self.entries[(n, n)].re
        } else {
            0.0
        }
    }

    pub fn population_above(&self, n_max: usize) -> f64 {
        (n_max + 1..self.dim()).map(|n| self.entries[(n, n)].re).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        (0..self.dim()).map(|n| n as f64 * self.entries[(n, n)].re).sum()
    }

    /// `<psi|rho|psi>`, with `psi` zero-padded or truncated to `dim`.
    pub fn expectation(&self, state: &StateVector) -> f64 {
        let psi = state.embed(self.dim());
        let v = psi.as_vector();
        (v.adjoint() * &self.entries * v)[(0, 0)].re
    }

    /// `D rho D^dagger` for a diagonal `D`.
    pub fn sandwich_diagonal(&self, phases: &[C64]) -> Result<Self> {
        if phases.len() != self.dim() {
            return Err(Error::InvalidDimension(format!(
                "diagonal of length {} applied to density matrix of dim {}",
                phases.len(),
                self.dim()
            )));
        }
        let dim = self.dim();
        let out = CMatrix::from_fn(dim, dim, |i, j| phases[i] * self.entries[(i, j)] * phases[j].conj());
        Ok(Self { entries: out })
    }
}

/// Parameters of the driven Kerr Hamiltonian in a frame rotating with the drive.
///
/// `detuning` is the drive frequency minus the cavity frequency, so the
/// number-operator term enters as `-detuning * n`. With that sign,
/// `detuning = 2 m kerr` makes `|m>` and `|m+1>` degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianParams {
    pub detuning: f64,
    pub kerr: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub dim: usize,
}

impl HamiltonianParams {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::InvalidDimension("dim must be at least 1".into()));
        }
        if self.amplitude > 0.0 && self.dim < 2 {
            return Err(Error::InvalidDimension("a drive needs dim >= 2".into()));
        }
        if !(self.kerr > 0.0) || !self.kerr.is_finite() {
            return Err(Error::InvalidArgument(format!("kerr must be positive, got {}", self.kerr)));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be nonnegative, got {}",
                self.amplitude
            )));
        }
        if !self.detuning.is_finite() || !self.phase.is_finite() {
            return Err(Error::InvalidArgument("detuning and phase must be finite".into()));
        }
        Ok(())
    }
}

/// Dense Hamiltonian matrix:
/// `H[n][n] = kerr n(n-1) - detuning n`, `H[n+1][n] = g e^{i phase} sqrt(n+1)`.
pub fn build_hamiltonian(params: &HamiltonianParams) -> Result<CMatrix> {
    params.validate()?;
    let dim = params.dim;
    let mut h = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        let nf = n as f64;
        h[(n, n)] = C64::new(params.kerr * nf * (nf - 1.0) - params.detuning * nf, 0.0);
    }
    let drive = C64::from_polar(params.amplitude, params.phase);
    for n in 0..dim.saturating_sub(1) {
        let c = drive * ((n + 1) as f64).sqrt();
        h[(n + 1, n)] = c;
        h[(n, n + 1)] = c.conj();
    }
    Ok(h)
}

/// Truncated annihilation operator `a|n> = sqrt(n)|n-1>`.
pub fn annihilation(dim: usize) -> CMatrix {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Largest elementwise `|H_ij - conj(H_ji)|`.
pub fn hermiticity_error(h: &CMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    let n = h.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `exp(-i H t)` for a Hermitian `H`.
pub fn propagator(h: &CMatrix, duration: f64) -> Result<CMatrix> {
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::InvalidDimension(format!("hamiltonian is {}x{}", h.nrows(), h.ncols())));
    }
    let herm = hermiticity_error(h);
    if herm > HERMITIAN_TOLERANCE {
        return Err(Error::ContractViolation(format!(
            "hamiltonian is not hermitian (max deviation {herm:e})"
        )));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::InvalidArgument(format!("duration must be >= 0, got {duration}")));
    }
    if duration == 0.0 {
        return Ok(CMatrix::identity(h.nrows(), h.nrows()));
    }
    Ok((h * C64::new(0.0, -duration)).exp())
}

/// Evolves `state` under a constant Hamiltonian for `duration`.
pub fn propagate_const(state: &StateVector, h: &CMatrix, duration: f64) -> Result<StateVector> {
    if h.nrows() != state.dim() {
        return Err(Error::InvalidDimension(format!(
            "state has dim {}, hamiltonian is {}x{}",
            state.dim(),
            h.nrows(),
            h.ncols()
        )));
    }
    if duration == 0.0 {
        // still validate the hamiltonian
        propagator(h, 0.0)?;
        return Ok(state.clone());
    }
    let u = propagator(h, duration)?;
    Ok(StateVector::from_vector(u * state.as_vector()))
}

/// `|<a|b>|^2 / (<a|a><b|b>)`. States of different length are compared
/// with the shorter one zero-padded.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    if !(na > 0.0) || !(nb > 0.0) {
        return Err(Error::InvalidState("fidelity of a zero-norm state".into()));
    }
    let f = a.inner(b).norm_sqr() / (na * nb);
    Ok(f.clamp(0.0, 1.0))
}

/// Diagonal `exp(+i kerr (n-i)(n-i-1) t)` undoing the free Kerr phases
/// accumulated while transition `|i> <-> |i+1>` was being driven.
pub fn kerr_phase_compensation(pulse_index: usize, kerr: f64, duration: f64, dim: usize) -> Vec<C64> {
    let i = pulse_index as f64;
    (0..dim)
        .map(|n| {
            let k = n as f64 - i;
            let e = k * (k - 1.0);
            if e == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                C64::from_polar(1.0, kerr * e * duration)
            }
        })
        .collect()
}
