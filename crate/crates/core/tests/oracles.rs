//! Checks against quantities computed by unrelated means: first-step
//! recursions for second moments, absorbing-chain solves for voltages,
//! Laplacian pseudoinverses for resistances, and the catalog closed forms.

use approx::assert_relative_eq;
use kemeny_core::catalog::{three_state_closed_forms, two_state_closed_forms, ThreeStateParams, TwoStateParams};
use kemeny_core::chain::stationary;
use kemeny_core::ginverse::{fundamental_matrix, group_inverse, parametric_ginverse};
use kemeny_core::graph::{
    effective_resistance, hitting_times_via_resistance, kirchhoff_index, kirkland_mu, voltage_solve, walk_from_graph,
    GraphSpec, KirchhoffMethod, Network,
};
use kemeny_core::kemeny::kemeny_constant;
use kemeny_core::mixing::{mixing_variance_closed_form, two_state_variance};
use kemeny_core::passage::{mfpt_direct, mfpt_from_ginverse, stationary_hitting_expectation};
use kemeny_core::sample::{random_conductances, random_connected_graph, random_irreducible};
use kemeny_core::{ProbabilityVector, TransitionMatrix};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// First and second moments of first passage (`n ≥ 1`) to every state,
/// by `s = (I − Q)⁻¹(e + 2 Q m₁)` on the chain killed at `j`.
fn passage_moments(p: &TransitionMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = p.m();
    let (mut m1, mut m2) = (DMatrix::zeros(m, m), DMatrix::zeros(m, m));
    for j in 0..m {
        let keep: Vec<usize> = (0..m).filter(|&i| i != j).collect();
        let q = DMatrix::from_fn(m - 1, m - 1, |a, b| p.get(keep[a], keep[b]));
        let lu = (DMatrix::identity(m - 1, m - 1) - &q).lu();
        let e = DVector::from_element(m - 1, 1.0);
        let t1 = lu.solve(&e).unwrap();
        let t2 = lu.solve(&(&e + &q * &t1 * 2.0)).unwrap();
        let mut f1 = DVector::zeros(m);
        let mut f2 = DVector::zeros(m);
        for (a, &i) in keep.iter().enumerate() {
            f1[i] = t1[a];
            f2[i] = t2[a];
        }
        // Return to j: one step, then the killed moments from the landing state.
        let row = p.matrix().row(j).transpose();
        f2[j] = 1.0 + 2.0 * row.dot(&f1) + row.dot(&f2);
        f1[j] = 1.0 + row.dot(&f1);
        m1.set_column(j, &f1);
        m2.set_column(j, &f2);
    }
    (m1, m2)
}

fn eta2_oracle(p: &TransitionMatrix, pi: &ProbabilityVector) -> DVector<f64> {
    let (_, m2) = passage_moments(p);
    m2 * pi.vector()
}

#[test]
fn second_moment_formula_matches_first_step_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..60 {
        let m = 2 + trial % 7;
        let p = random_irreducible(&mut rng, m).unwrap();
        let pi = stationary(&p).unwrap();
        let oracle = eta2_oracle(&p, &pi);
        let t = DVector::from_element(m, 1.0);
        let u = DVector::from_fn(m, |_, _| 0.2 + rng.random::<f64>());
        let f = DVector::from_fn(m, |_, _| rng.random::<f64>() - 0.5);
        let g = DVector::from_element(m, rng.random::<f64>() - 0.5);
        let member = parametric_ginverse(&p, &pi, &t, &u, &f, &g).unwrap();
        assert!(member.ge_constant.is_some());
        for gi in [fundamental_matrix(&p, &pi).unwrap(), group_inverse(&p, &pi).unwrap(), member] {
            let mv = mixing_variance_closed_form(&p, &pi, &gi).unwrap();
            let scale = oracle.amax().max(1.0);
            assert!((&mv.eta2 - &oracle).amax() < 1e-8 * scale, "trial {trial}: {} vs {}", mv.eta2, oracle);
            let k = kemeny_constant(&p).unwrap();
            assert!((&mv.v - oracle.add_scalar(-k * k)).amax() < 1e-8 * scale);
        }
    }
}

#[test]
fn two_state_variance_fixture() {
    let [v1, v2] = two_state_variance(0.3, 0.5).unwrap();
    assert_relative_eq!(v1, 4.520_833_333_333_333, max_relative = 1e-14);
    assert_relative_eq!(v2, 3.854_166_666_666_667, max_relative = 1e-14);
    let p = TransitionMatrix::from_rows(&[&[0.7, 0.3], &[0.5, 0.5]]).unwrap();
    let pi = stationary(&p).unwrap();
    let eta2 = eta2_oracle(&p, &pi);
    assert_relative_eq!(eta2[0], 4.520_833_333_333_333 + 2.25 * 2.25, max_relative = 1e-12);
    assert_relative_eq!(eta2[1], 3.854_166_666_666_667 + 2.25 * 2.25, max_relative = 1e-12);
}

#[test]
fn stationary_start_expectation_is_column_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for m in 2..=8 {
        let p = random_irreducible(&mut rng, m).unwrap();
        let pi = stationary(&p).unwrap();
        let mm = mfpt_direct(&p).unwrap();
        let z = fundamental_matrix(&p, &pi).unwrap();
        let member = kemeny_core::kemeny::generic_parametric(&p, &pi).unwrap();
        for j in 0..m {
            let expected: f64 = (0..m).map(|i| pi.get(i) * mm.get(i, j)).sum();
            for g in [&z, &member] {
                let got = stationary_hitting_expectation(&p, &pi, g, j).unwrap();
                assert_relative_eq!(got, expected, max_relative = 1e-9);
            }
        }
    }
}

#[test]
fn general_ginverse_mfpt_uses_row_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for m in 2..=8 {
        let p = random_irreducible(&mut rng, m).unwrap();
        let pi = stationary(&p).unwrap();
        let member = kemeny_core::kemeny::generic_parametric(&p, &pi).unwrap();
        assert!(member.ge_constant.is_none());
        let via = mfpt_from_ginverse(&p, &pi, &member).unwrap();
        let direct = mfpt_direct(&p).unwrap();
        assert!((via.entries - direct.entries).amax() < 1e-8);
    }
}

#[test]
fn resistance_matches_pseudoinverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for m in 2..=8 {
        let net = Network::new(random_conductances(&mut rng, m)).unwrap();
        let lap = net.laplacian();
        let pinv = lap.clone().pseudo_inverse(1e-12).unwrap();
        for a in 0..m {
            for b in 0..m {
                let r = effective_resistance(&net, a, b).unwrap();
                let oracle = pinv[(a, a)] + pinv[(b, b)] - 2.0 * pinv[(a, b)];
                assert!((r - oracle).abs() < 1e-10 * oracle.abs().max(1.0));
                assert!((r - effective_resistance(&net, b, a).unwrap()).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn voltage_is_absorption_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for m in 3..=8 {
        let net = Network::new(random_conductances(&mut rng, m)).unwrap();
        let p = net.walk().unwrap();
        let (a, b) = (0, m - 1);
        let sol = voltage_solve(&net, a, b).unwrap();
        assert!(sol.max_kcl_residual < 1e-9);
        // h = P h off {a, b}, with h_a = 1, h_b = 0.
        let inner: Vec<usize> = (1..m - 1).collect();
        let n = inner.len();
        let sys = DMatrix::from_fn(n, n, |r, s| if r == s { 1.0 } else { 0.0 } - p.get(inner[r], inner[s]));
        let rhs = DVector::from_fn(n, |r, _| p.get(inner[r], a));
        let h = sys.lu().solve(&rhs).unwrap();
        for (r, &i) in inner.iter().enumerate() {
            assert!((sol.voltages[i] - h[r]).abs() < 1e-9);
        }
    }
}

#[test]
fn commute_identity_and_hitting_times() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for trial in 0..20 {
        let m = 2 + trial % 7;
        let g = random_connected_graph(&mut rng, m).unwrap();
        let net = Network::from_graph(&g).unwrap();
        let edges = g.edges().len() as f64;
        let mm = mfpt_direct(&walk_from_graph(&g).unwrap()).unwrap();
        let hits = hitting_times_via_resistance(&net).unwrap();
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let r = effective_resistance(&net, i, j).unwrap();
                assert!((mm.get(i, j) + mm.get(j, i) - 2.0 * edges * r).abs() < 1e-8);
                assert!((hits[(i, j)] - mm.get(i, j)).abs() < 1e-8);
            }
        }
        let kf = kirchhoff_index(&g, KirchhoffMethod::Resistance).unwrap();
        for method in [KirchhoffMethod::HittingTimes, KirchhoffMethod::Laplacian] {
            assert!((kirchhoff_index(&g, method).unwrap() - kf).abs() < 1e-7 * kf);
        }
    }
}

#[test]
fn catalog_matches_pipeline() {
    for ai in 1..=10 {
        for bi in 1..=10 {
            let params = TwoStateParams::new(ai as f64 / 10.0, bi as f64 / 10.0).unwrap();
            let cf = two_state_closed_forms(params).unwrap();
            let p = params.matrix().unwrap();
            assert!((kemeny_constant(&p).unwrap() - cf.k).abs() < 1e-9);
            assert!((mfpt_direct(&p).unwrap().entries - &cf.mfpt).amax() < 1e-9);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut done = 0;
    while done < 50 {
        let mut row = || {
            let s = rng.random::<f64>().max(1e-3);
            let f = rng.random::<f64>();
            (s * f, s * (1.0 - f))
        };
        let ((p2, p3), (q1, q3), (r1, r2)) = (row(), row(), row());
        let params = ThreeStateParams::new(p2, p3, q1, q3, r1, r2).unwrap();
        if params.deltas().iter().any(|d| *d < 1e-3) {
            continue;
        }
        let cf = three_state_closed_forms(params).unwrap();
        let p = params.matrix().unwrap();
        let pi = stationary(&p).unwrap();
        assert!((pi.vector() - &cf.pi).amax() < 1e-9);
        let mm = mfpt_direct(&p).unwrap().entries;
        assert!((&mm - &cf.mfpt).amax() < 1e-9 * cf.mfpt.amax().max(1.0));
        assert!((kemeny_constant(&p).unwrap() - cf.k).abs() < 1e-9 * cf.k);
        assert!(cf.k >= 2.0 - 1e-12);
        done += 1;
    }
}

#[test]
fn directed_cycle_attains_kirkland_infimum() {
    for m in 3..=8 {
        let g = GraphSpec::directed_cycle(m).unwrap();
        let mu = kirkland_mu(&g).unwrap();
        assert_eq!(mu, (m as f64 - 1.0) / 2.0);
        let k_mod = kemeny_constant(&walk_from_graph(&g).unwrap()).unwrap() - 1.0;
        assert!((k_mod - mu).abs() < 1e-12);
    }
}
