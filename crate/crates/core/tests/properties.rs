use kemeny_core::chain::{classify, spectrum, stationary};
use kemeny_core::ginverse::{fundamental_matrix, group_inverse, verify_ginverse};
use kemeny_core::graph::{conductances_from_chain, walk_from_graph};
use kemeny_core::kemeny::{kemeny_bounds, kemeny_constancy, kemeny_report, Route};
use kemeny_core::mixing::{estimate_mixing_moments_with, MixingVariant};
use kemeny_core::passage::{mfpt_direct, mfpt_direct_with, mfpt_from_ginverse};
use kemeny_core::perturb::{l1_bound_check, type1_analysis, type2_invariance, Perturbation, PerturbationKindTag};
use kemeny_core::sample::{random_chain, random_connected_graph, random_irreducible, random_perturbation, ChainFamily};
use kemeny_core::{apply_perturbation, Execution, TransitionMatrix};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chain(seed: u64, m: usize) -> TransitionMatrix {
    random_irreducible(&mut ChaCha8Rng::seed_from_u64(seed), m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stationary_vector_is_fixed(seed in any::<u64>(), m in 2usize..=8) {
        let p = chain(seed, m);
        let pi = stationary(&p).unwrap();
        prop_assert!(pi.stationarity_residual(&p) < 1e-10);
        prop_assert!((pi.vector().sum() - 1.0).abs() < 1e-12);
        prop_assert!(pi.as_slice().iter().all(|x| *x > 0.0));
    }

    #[test]
    fn z_and_group_inverse_identities(seed in any::<u64>(), m in 2usize..=8) {
        let p = chain(seed, m);
        let pi = stationary(&p).unwrap();
        let z = fundamental_matrix(&p, &pi).unwrap();
        let a = group_inverse(&p, &pi).unwrap();
        let e = DVector::from_element(m, 1.0);
        prop_assert!((&z.matrix * &e - &e).amax() < 1e-10);
        prop_assert!((z.matrix.transpose() * pi.vector() - pi.vector()).amax() < 1e-10);
        prop_assert!((&a.matrix * &e).amax() < 1e-10);
        prop_assert!(verify_ginverse(&p, &z.matrix).unwrap().passed);
        // A# A A# = A#.
        let ia = p.i_minus_p();
        prop_assert!((&a.matrix * &ia * &a.matrix - &a.matrix).amax() < 1e-8 * a.matrix.amax().max(1.0));
        prop_assert!((&a.matrix * &ia - &ia * &a.matrix).amax() < 1e-9 * a.matrix.amax().max(1.0));
    }

    #[test]
    fn routes_agree(seed in any::<u64>(), m in 2usize..=8) {
        let p = chain(seed, m);
        let report = kemeny_report(&p, &Route::ALL).unwrap();
        prop_assert!(report.relative_spread() < 1e-7, "spread {}", report.relative_spread());
        prop_assert_eq!(report.submatrix_by_state.len(), m);
        let bounds = kemeny_bounds(&spectrum(&p).unwrap(), &classify(&p));
        prop_assert!(bounds.contains(report.k, 1e-9));
    }

    #[test]
    fn mfpt_routes_and_constancy(seed in any::<u64>(), m in 2usize..=8) {
        let p = chain(seed, m);
        let pi = stationary(&p).unwrap();
        let direct = mfpt_direct(&p).unwrap();
        let via_z = mfpt_from_ginverse(&p, &pi, &fundamental_matrix(&p, &pi).unwrap()).unwrap();
        let scale = direct.entries.amax().max(1.0);
        prop_assert!((&direct.entries - &via_z.entries).amax() < 1e-9 * scale);
        prop_assert!(direct.equation_residual(&p) < 1e-9 * scale);
        for i in 0..m {
            prop_assert!((direct.get(i, i) * pi.get(i) - 1.0).abs() < 1e-9);
        }
        prop_assert!(kemeny_constancy(&p, &direct, &pi).is_ok());
    }

    #[test]
    fn execution_mode_is_invisible(seed in any::<u64>(), m in 2usize..=6) {
        let p = chain(seed, m);
        let pi = stationary(&p).unwrap();
        let s = mfpt_direct_with(&p, Execution::Sequential).unwrap();
        let q = mfpt_direct_with(&p, Execution::Parallel).unwrap();
        prop_assert_eq!(s, q);
        let a = estimate_mixing_moments_with(&p, &pi, 0, MixingVariant::Return, 9000, seed, Execution::Sequential).unwrap();
        let b = estimate_mixing_moments_with(&p, &pi, 0, MixingVariant::Return, 9000, seed, Execution::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn l1_bound_on_random_pairs(seed in any::<u64>(), m in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_irreducible(&mut rng, m).unwrap();
        let pert = random_perturbation(&mut rng, &p, PerturbationKindTag::General).unwrap();
        let q = apply_perturbation(&p, &pert).unwrap();
        let report = l1_bound_check(&p, &q).unwrap();
        prop_assert!(report.holds, "{:?}", report);
    }

    #[test]
    fn type2_keeps_k(seed in any::<u64>(), m in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_chain(&mut rng, m, ChainFamily::Dense).unwrap();
        let Perturbation::Type2 { h } = random_perturbation(&mut rng, &p, PerturbationKindTag::Type2).unwrap() else {
            unreachable!()
        };
        let r = type2_invariance(&p, &h).unwrap();
        prop_assert!(r.invariant, "{:?}", r);
    }

    #[test]
    fn type1_fixes_column_r(seed in any::<u64>(), m in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_irreducible(&mut rng, m).unwrap();
        let Perturbation::Type1 { r, h } = random_perturbation(&mut rng, &p, PerturbationKindTag::Type1).unwrap() else {
            unreachable!()
        };
        let rep = type1_analysis(&p, r, &h).unwrap();
        prop_assert!(rep.max_fixed_column_delta < 1e-8 * rep.k.max(1.0));
        prop_assert!(rep.identity_residual < 1e-8 * rep.k.max(1.0));
        prop_assert_eq!(rep.sign_mismatches, 0);
    }

    #[test]
    fn graph_chain_duality(seed in any::<u64>(), m in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_connected_graph(&mut rng, m).unwrap();
        let p = walk_from_graph(&g).unwrap();
        let net = conductances_from_chain(&p, &stationary(&p).unwrap()).unwrap();
        let ratios: Vec<f64> = g.edges().iter().map(|&(i, j, w)| net.conductances()[(i, j)] / w).collect();
        for r in &ratios {
            prop_assert!((r - ratios[0]).abs() < 1e-9 * ratios[0]);
        }
    }
}
