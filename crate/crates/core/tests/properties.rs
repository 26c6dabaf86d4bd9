mod common;

use common::*;
use gmnl::experiments::{theorem2_batch, THEOREM2_GAP};
use gmnl::measurement::born_behavior;
use gmnl::quantum::appendix::appendix_measurements;
use gmnl::quantum::canonical::canonical_sample_with_gap;
use gmnl::quantum::optimize::{maximize, Objective};
use gmnl::quantum::{verify_theorem2, OptimizationConfig};
use gmnl::scenario::Scenario;
use gmnl::seeds::chsh_seed;
use gmnl::state::{ghz_state, mix_white_noise, SpectralForm};
use nalgebra::DMatrix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn born_behaviors_are_normalized_and_nonsignaling(seed in any::<u64>(), n in 2usize..=3, d in 2usize..=3) {
        prop_assert_eq!(born_behavior_is_valid(seed, n, d), Ok(()));
    }

    #[test]
    fn white_noise_is_affine(seed in any::<u64>(), q in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let s = Scenario::new(2, 2, 3).unwrap();
        let rho = random_mixed(&mut r, 2, 3);
        let meas = random_measurements(&mut r, s);
        let mixed = born_behavior(&mix_white_noise(&rho, q).unwrap(), &meas).unwrap();
        let clean = born_behavior(&rho, &meas).unwrap();
        let u = 1.0 / 9.0;
        for (pm, pc) in mixed.probs().iter().zip(clean.probs()) {
            prop_assert!((pm - ((1.0 - q) * pc + q * u)).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_identity_holds(seed in any::<u64>()) {
        prop_assert_eq!(decomposition_identity(seed), Ok(()));
    }

    #[test]
    fn lift_keeps_coefficients(seed in any::<u64>()) {
        prop_assert_eq!(lift_preserves_terms(seed), Ok(()));
    }

    #[test]
    fn appendix_measurements_are_complete(seed in any::<u64>(), alpha in 0.05f64..1.5) {
        let st = canonical_sample_with_gap(&mut rng(seed), true, THEOREM2_GAP);
        let meas = appendix_measurements(&st, alpha).unwrap();
        let id = DMatrix::identity(2, 2);
        for party in 0..3 {
            for x in 0..2 {
                let sum = meas.effect(party, x, 0) + meas.effect(party, x, 1);
                prop_assert!((sum - &id).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn construction_violates_for_separated_coefficients(seed in any::<u64>()) {
        let st = canonical_sample_with_gap(&mut rng(seed), true, THEOREM2_GAP);
        prop_assert!(verify_theorem2(&st).unwrap().margin > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn canonical_form_survives_local_unitaries(seed in any::<u64>()) {
        prop_assert_eq!(canonical_form_is_lu_invariant(seed), Ok(()));
    }

    #[test]
    fn more_restarts_never_lose(seed in any::<u64>()) {
        let s = Scenario::qubits(2);
        let psi = ghz_state(2, 2).unwrap();
        let obj = Objective::new(&chsh_seed(), &SpectralForm::pure(&psi), false).unwrap();
        let mut last = f64::NEG_INFINITY;
        for r in 1..=4 {
            let cfg = OptimizationConfig { max_iterations: 200, ..OptimizationConfig::default() }
                .with_restarts(r)
                .with_seed(seed);
            let v = maximize(&obj, &cfg, &[]).unwrap().value;
            prop_assert!(v >= last);
            last = v;
        }
        prop_assert_eq!(obj.layout().scenario, s);
    }

    #[test]
    fn reports_are_reproducible(seed in any::<u64>()) {
        let a = serde_json::to_string(&theorem2_batch(5, seed).unwrap()).unwrap();
        let b = serde_json::to_string(&theorem2_batch(5, seed).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn ghz_is_permutation_invariant() {
    for (n, d) in [(3, 2), (4, 2), (3, 3)] {
        let psi = ghz_state(n, d).unwrap();
        let perm: Vec<usize> = (0..n).rev().collect();
        assert_eq!(psi.permute_parties(&perm).unwrap(), psi);
        let perm: Vec<usize> = (1..n).chain([0]).collect();
        assert_eq!(psi.permute_parties(&perm).unwrap(), psi);
    }
}
