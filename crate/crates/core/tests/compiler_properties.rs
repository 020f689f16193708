mod common;

use common::*;
use kerrfock::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

fn target_from(seed: u64, n_max: usize) -> TargetState {
    random_target(&mut ChaCha8Rng::seed_from_u64(seed), n_max)
}

#[test]
fn zero_coefficient_target_round_trips_through_rwa() {
    let t = TargetState::new(vec![
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(0.0, 0.0),
        C64::new(FRAC_1_SQRT_2, 0.0),
    ])
    .unwrap();
    for conv in [RotationConvention::Propagator, RotationConvention::Reversed] {
        let seq = compile_with(&t, 0.01, 1.0, conv).unwrap();
        let psi = evolve_rwa_sequence(&seq, 3).unwrap();
        assert!(fidelity(&psi, &t.to_state(3).unwrap()).unwrap() > 1.0 - 1e-12);
        for (a, b) in psi.amplitudes().iter().zip(t.coefficients()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn compile_then_decompile_is_identity(seed in any::<u64>(), n_max in 0usize..=12, g in 1e-4..0.5f64) {
        let t = target_from(seed, n_max);
        let seq = compile(&t, g, 1.0).unwrap();
        let (canonical, _) = t.phase_normalized();
        let back = decompile_check(&seq);
        prop_assert_eq!(back.n_max(), n_max);
        for (a, b) in back.coefficients().iter().zip(canonical.coefficients()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn one_pulse_per_excitation(seed in any::<u64>(), n_max in 0usize..=12) {
        let seq = compile(&target_from(seed, n_max), 0.01, 1.0).unwrap();
        prop_assert_eq!(seq.len(), n_max);
        for (k, p) in seq.pulses().iter().enumerate() {
            prop_assert_eq!(p.index, k);
            prop_assert_eq!(p.detuning, 2.0 * k as f64);
            let angle = p.rotation_angle();
            prop_assert!((0.0..=FRAC_PI_2 + 1e-15).contains(&angle));
        }
    }

    #[test]
    fn rwa_route_reaches_every_target(seed in any::<u64>(), n_max in 0usize..=12) {
        let t = target_from(seed, n_max);
        let seq = compile(&t, 0.05, 1.0).unwrap();
        let psi = evolve_rwa_sequence(&seq, n_max + 1).unwrap();
        prop_assert!(fidelity(&psi, &t.to_state(n_max + 1).unwrap()).unwrap() >= 1.0 - 1e-10);
    }

    #[test]
    fn drive_scaling_only_rescales_durations(seed in any::<u64>(), n_max in 1usize..=8, s in 0.1..10.0f64) {
        let t = target_from(seed, n_max);
        let a = compile(&t, 0.01, 1.0).unwrap();
        let b = compile(&t, 0.01 * s, 1.0).unwrap();
        for (p, q) in a.pulses().iter().zip(b.pulses()) {
            prop_assert!((q.duration - p.duration / s).abs() <= 1e-12 * p.duration.max(1.0));
            prop_assert_eq!(p.phase, q.phase);
            prop_assert_eq!(p.detuning, q.detuning);
        }
    }

    #[test]
    fn convention_flip_leaves_fidelities_unchanged(seed in any::<u64>(), n_max in 1usize..=4) {
        let t = target_from(seed, n_max);
        let a = compile_with(&t, 0.02, 1.0, RotationConvention::Propagator).unwrap();
        let b = compile_with(&t, 0.02, 1.0, RotationConvention::Reversed).unwrap();
        let dim = n_max + 1;
        let fa = fidelity(&evolve_rwa_sequence(&a, dim).unwrap(), &t.to_state(dim).unwrap()).unwrap();
        let fb = fidelity(&evolve_rwa_sequence(&b, dim).unwrap(), &t.to_state(dim).unwrap()).unwrap();
        prop_assert!((fa - fb).abs() < 1e-12);
        let cfg = SimConfig::with_guard(3);
        let ra = evolve_full_sequence(&a, &cfg, &t).unwrap();
        let rb = evolve_full_sequence(&b, &cfg, &t).unwrap();
        prop_assert!((ra.fidelity_vs_target - rb.fidelity_vs_target).abs() < 1e-10);
        prop_assert!(fidelity(&ra.final_state, &rb.final_state).unwrap() > 1.0 - 1e-10);
    }
}

#[test]
fn pure_fock_targets_use_full_transfers() {
    for n in 1..=10 {
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[n] = C64::new(1.0, 0.0);
        let seq = compile(&TargetState::new(coeffs).unwrap(), 0.03, 1.0).unwrap();
        assert_eq!(seq.len(), n);
        for p in seq.pulses() {
            let full = FRAC_PI_2 / p.rabi_frequency();
            assert!((p.duration - full).abs() < 1e-12 * full);
        }
    }
}
