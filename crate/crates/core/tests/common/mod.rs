//! Test-only oracles, written independently of the library's numerics.
#![allow(dead_code)]

use kerrfock::{PulseSequence, TargetState, C64};
use rand::Rng;
use rand_distr::StandardNormal;

pub type Dense = Vec<Vec<C64>>;

/// Literal transcription of the resonant Kerr Hamiltonian for pulse `i`:
/// `sum_n chi (n-i)(n-i-1)|n><n| + g e^{i phi} sum_n sqrt(n+1)|n+1><n| + h.c.`
pub fn resonant_hamiltonian_literal(i: usize, chi: f64, g: f64, phi: f64, dim: usize) -> Dense {
    let mut h = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for (n, row) in h.iter_mut().enumerate() {
        let n = n as i64;
        let i = i as i64;
        row[n as usize] = C64::new(chi * ((n - i) * (n - i - 1)) as f64, 0.0);
    }
    for n in 0..dim.saturating_sub(1) {
        let amp = g * ((n + 1) as f64).sqrt();
        h[n + 1][n] = C64::new(amp * phi.cos(), amp * phi.sin());
        h[n][n + 1] = C64::new(amp * phi.cos(), -amp * phi.sin());
    }
    h
}

/// Same operator with the detuning written explicitly: drive frequency minus
/// cavity frequency `delta`, so the diagonal is `chi n(n-1) - delta n`.
pub fn detuned_hamiltonian_literal(delta: f64, chi: f64, g: f64, phi: f64, dim: usize) -> Dense {
    let mut h = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for (n, row) in h.iter_mut().enumerate() {
        let nf = n as f64;
        row[n] = C64::new(chi * nf * (nf - 1.0) - delta * nf, 0.0);
    }
    for n in 0..dim.saturating_sub(1) {
        let amp = g * ((n + 1) as f64).sqrt();
        h[n + 1][n] = C64::new(amp * phi.cos(), amp * phi.sin());
        h[n][n + 1] = C64::new(amp * phi.cos(), -amp * phi.sin());
    }
    h
}

fn mat_vec(h: &Dense, v: &[C64]) -> Vec<C64> {
    h.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Classical RK4 on `psi' = -i H psi` with `steps` equal steps.
pub fn rk4_schrodinger(h: &Dense, psi: &[C64], duration: f64, steps: usize) -> Vec<C64> {
    let dt = duration / steps as f64;
    let minus_i = C64::new(0.0, -1.0);
    let rhs = |v: &[C64]| -> Vec<C64> { mat_vec(h, v).into_iter().map(|x| x * minus_i).collect() };
    let axpy = |v: &[C64], k: &[C64], a: f64| -> Vec<C64> { v.iter().zip(k).map(|(x, y)| x + y * a).collect() };
    let mut y = psi.to_vec();
    for _ in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&axpy(&y, &k1, 0.5 * dt));
        let k3 = rhs(&axpy(&y, &k2, 0.5 * dt));
        let k4 = rhs(&axpy(&y, &k3, dt));
        for n in 0..y.len() {
            y[n] += (k1[n] + (k2[n] + k3[n]) * 2.0 + k4[n]) * (dt / 6.0);
        }
    }
    y
}

/// Runs a compiled sequence through the RK4 oracle, including the
/// per-pulse removal of free Kerr phases, and returns the final state.
pub fn rk4_full_sequence(seq: &PulseSequence, chi: f64, dim: usize, steps_per_pulse: usize) -> Vec<C64> {
    let mut psi = vec![C64::new(0.0, 0.0); dim];
    psi[0] = C64::new(1.0, 0.0);
    for p in seq.pulses() {
        let drive_phase = seq.convention().drive_phase(p.phase);
        let h = detuned_hamiltonian_literal(p.detuning, chi, p.amplitude, drive_phase, dim);
        psi = rk4_schrodinger(&h, &psi, p.duration, steps_per_pulse);
        let i = p.index as f64;
        for (n, amp) in psi.iter_mut().enumerate() {
            let k = n as f64 - i;
            *amp *= C64::from_polar(1.0, chi * k * (k - 1.0) * p.duration);
        }
    }
    psi
}

pub fn overlap_sq(a: &[C64], b: &[C64]) -> f64 {
    let inner: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    inner.norm_sqr() / (na * nb)
}

pub fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Random target with highest index exactly `n_max`, uniform on the
/// complex unit sphere of dimension `n_max + 1`.
pub fn random_target<R: Rng>(rng: &mut R, n_max: usize) -> TargetState {
    loop {
        let coeffs: Vec<C64> = (0..=n_max)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        if coeffs[n_max].norm() > 1e-8 {
            return TargetState::renormalized(coeffs).unwrap();
        }
    }
}

/// Random Hermitian matrix with Gaussian entries of the given scale.
#[allow(clippy::needless_range_loop)]
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Dense {
    let mut h = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        let d: f64 = rng.sample(StandardNormal);
        h[i][i] = C64::new(scale * d, 0.0);
        for j in i + 1..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h[i][j] = C64::new(re, im) * scale;
            h[j][i] = h[i][j].conj();
        }
    }
    h
}

pub fn to_matrix(h: &Dense) -> kerrfock::CMatrix {
    let dim = h.len();
    kerrfock::CMatrix::from_fn(dim, dim, |i, j| h[i][j])
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
