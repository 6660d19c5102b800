use cvsteer::network::{
    apply_symplectic, beam_splitter_symplectic, correlation_variance, ghz_correlations,
    lossy_channel, phase_flip_symplectic, MODE_A,
};
use cvsteer::steering::{Direction, MONOGAMY_TOL};
use cvsteer::symplectic::PHYSICALITY_TOL;
use cvsteer::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn thermal(nus: &[f64]) -> CovarianceMatrix {
    let diag: Vec<f64> = nus.iter().flat_map(|&n| [n, n]).collect();
    CovarianceMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(diag))).unwrap()
}

fn single_mode(n_modes: usize, k: usize, block: [[f64; 2]; 2]) -> SymplecticMatrix {
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for i in 0..2 {
        for j in 0..2 {
            s[(2 * k + i, 2 * k + j)] = block[i][j];
        }
    }
    SymplecticMatrix::new(s).unwrap()
}

fn squeezer(n_modes: usize, k: usize, r: f64) -> SymplecticMatrix {
    single_mode(n_modes, k, [[(-r).exp(), 0.0], [0.0, r.exp()]])
}

fn rotation(n_modes: usize, k: usize, phi: f64) -> SymplecticMatrix {
    let (c, s) = (phi.cos(), phi.sin());
    single_mode(n_modes, k, [[c, s], [-s, c]])
}

/// Random Gaussian unitary from squeezers, rotations and beam splitters.
fn random_symplectic(n_modes: usize, params: &[(f64, f64, f64)]) -> SymplecticMatrix {
    let mut s = SymplecticMatrix::identity(n_modes);
    for (i, &(r, phi, t)) in params.iter().enumerate() {
        let k = i % n_modes;
        let l = (i + 1) % n_modes;
        s = squeezer(n_modes, k, r).compose(&s).unwrap();
        s = rotation(n_modes, k, phi).compose(&s).unwrap();
        if n_modes > 1 {
            s = beam_splitter_symplectic(n_modes, k, l, t)
                .unwrap()
                .compose(&s)
                .unwrap();
        }
    }
    s
}

fn state(r: f64, eta: f64) -> CovarianceMatrix {
    prepare_state(&GhzConfig::symmetric(r).with_eta(eta)).unwrap()
}

fn unitary_params() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-0.8f64..0.8, 0.0f64..6.3, 0.0f64..1.0), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symplectic_invariance_three_modes(
        nus in prop::collection::vec(1.0f64..3.0, 3),
        params in unitary_params(),
    ) {
        let cm = thermal(&nus);
        let s = random_symplectic(3, &params);
        let before = symplectic_eigenvalues(&cm).unwrap();
        let after = symplectic_eigenvalues(&apply_symplectic(&cm, &s).unwrap()).unwrap();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-9 * a.max(1.0), "{before:?} vs {after:?}");
        }
    }

    #[test]
    fn symplectic_invariance_two_modes(
        nus in prop::collection::vec(1.0f64..3.0, 2),
        params in unitary_params(),
    ) {
        let cm = thermal(&nus);
        let s = random_symplectic(2, &params);
        let before = symplectic_eigenvalues(&cm).unwrap();
        let after = symplectic_eigenvalues(&apply_symplectic(&cm, &s).unwrap()).unwrap();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-9 * a.max(1.0), "{before:?} vs {after:?}");
        }
    }

    #[test]
    fn eigenvalue_product_is_root_determinant(
        nus in prop::collection::vec(1.0f64..3.0, 1..4),
        params in unitary_params(),
    ) {
        let n = nus.len();
        let cm = apply_symplectic(&thermal(&nus), &random_symplectic(n, &params)).unwrap();
        let prod: f64 = symplectic_eigenvalues(&cm).unwrap().iter().map(|v| v * v).product();
        let det = cm.determinant();
        prop_assert!((prod - det).abs() < 1e-9 * det);
    }

    #[test]
    fn ghz_is_pure_and_physical(r in 0.0f64..2.0) {
        let cm = build_ghz(&GhzConfig::symmetric(r)).unwrap();
        prop_assert!((purity(&cm) - 1.0).abs() < 1e-9);
        prop_assert!(is_physical(&cm, PHYSICALITY_TOL));
    }

    #[test]
    fn ghz_correlations_hold(r in 0.001f64..2.0) {
        let cm = build_ghz(&GhzConfig::symmetric(r)).unwrap();
        let [ab, ac, bc, psum] = ghz_correlations(&cm).unwrap();
        let two = 2.0 * (-2.0 * r).exp();
        for (_, v) in [ab, ac, bc] {
            prop_assert!((v - two).abs() < 1e-10);
        }
        prop_assert!((psum.1 - 1.5 * two).abs() < 1e-10);
    }

    #[test]
    fn loss_keeps_physicality(r in 0.0f64..1.5, eta in 0.0f64..=1.0, mode in 0usize..3) {
        let cm = lossy_channel(&build_ghz(&GhzConfig::symmetric(r)).unwrap(), mode, eta).unwrap();
        prop_assert!(is_physical(&cm, PHYSICALITY_TOL));
    }

    #[test]
    fn loss_composes_multiplicatively(r in 0.0f64..1.5, e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0) {
        let cm = build_ghz(&GhzConfig::symmetric(r)).unwrap();
        let twice = lossy_channel(&lossy_channel(&cm, MODE_A, e1).unwrap(), MODE_A, e2).unwrap();
        let once = lossy_channel(&cm, MODE_A, e1 * e2).unwrap();
        prop_assert!((twice.matrix() - once.matrix()).amax() < 1e-12);
    }

    #[test]
    fn steering_is_non_negative_and_monogamous(r in 0.0f64..1.2, eta in 0.0f64..=1.0) {
        let cm = state(r, eta);
        let report = steering_report(&cm).unwrap();
        prop_assert!(report.values().iter().all(|&g| g >= 0.0));
        let mono = MonogamyReport::from_report(&report);
        prop_assert!(mono.min() >= -MONOGAMY_TOL, "{:?}", mono);
    }

    #[test]
    fn no_one_to_one_steering(r in 0.0f64..1.2, eta in 0.0f64..=1.0) {
        let report = steering_report(&state(r, eta)).unwrap();
        for d in Direction::ONE_TO_ONE {
            prop_assert!(report.get(d) <= 1e-8, "{} = {}", d.label(), report.get(d));
        }
    }

    #[test]
    fn pure_state_directional_symmetry(r in 0.0f64..1.5) {
        let report = steering_report(&state(r, 1.0)).unwrap();
        for d in Direction::ONE_VS_TWO {
            prop_assert!((report.get(d) - report.get(d.reversed())).abs() < 1e-9);
        }
    }

    #[test]
    fn one_to_one_conditional_determinant_is_one(r in 0.0f64..1.5, k in 0usize..3) {
        // Holds for the GHZ (1+1) splits only; conditioning on both other
        // modes, or a two-mode squeezed state, gives det < 1.
        let cm = state(r, 1.0);
        for j in (0..3).filter(|&m| m != k) {
            let p = Partition::new(vec![j], vec![k]).unwrap();
            let det = schur_complement(&cm, &p).unwrap().determinant();
            prop_assert!((det - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn uncorrelated_schur_is_steered_block(
        a in prop::collection::vec(1.0f64..3.0, 2),
        b in prop::collection::vec(1.0f64..3.0, 2),
        params in unitary_params(),
    ) {
        let left = thermal(&a);
        let right = apply_symplectic(&thermal(&b), &random_symplectic(2, &params)).unwrap();
        let joint = CovarianceMatrix::direct_sum(&[left, right.clone()]);
        let p = Partition::new(vec![0, 1], vec![2, 3]).unwrap();
        prop_assert_eq!(schur_complement(&joint, &p).unwrap(), right);
    }

    #[test]
    fn phase_flip_leaves_second_moments_of_flipped_pair(r in 0.0f64..1.5, eta in 0.0f64..=1.0) {
        let cm = state(r, eta);
        let flipped = apply_symplectic(&cm, &phase_flip_symplectic(3, MODE_A).unwrap()).unwrap();
        let combo = QuadCombo::single(MODE_A, Quadrature::X);
        prop_assert_eq!(correlation_variance(&cm, &combo).unwrap(), correlation_variance(&flipped, &combo).unwrap());
    }
}

#[test]
fn permutation_symmetry_at_full_transmission() {
    let cm = state(0.339, 1.0);
    let base = steering_report(&cm).unwrap();
    let one = |r: &SteeringReport, ds: [Direction; 6]| {
        let mut v: Vec<f64> = ds.iter().map(|&d| r.get(d)).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    for perm in [[1, 2, 0], [2, 0, 1], [0, 2, 1], [1, 0, 2]] {
        let permuted = reduce(&cm, &perm).unwrap();
        let report = steering_report(&permuted).unwrap();
        for ds in [Direction::ONE_TO_ONE, Direction::ONE_VS_TWO] {
            let (a, b) = (one(&base, ds), one(&report, ds));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn monogamy_on_fine_grid() {
    for r in [0.1, 0.339, 0.8] {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        for row in sweep_eta(&GhzConfig::symmetric(r), &grid).unwrap() {
            assert!(
                row.monogamy.holds(),
                "r={r} eta={} {:?}",
                row.eta,
                row.monogamy
            );
        }
    }
}

#[test]
fn collective_steering_grows_with_transmission() {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let rows = sweep_eta(&GhzConfig::default(), &grid).unwrap();
    for d in [
        Direction::BCtoA,
        Direction::AtoBC,
        Direction::BtoAC,
        Direction::ACtoB,
    ] {
        for w in rows.windows(2) {
            assert!(
                w[1].steering.get(d) >= w[0].steering.get(d),
                "{} at {}",
                d.label(),
                w[1].eta
            );
        }
    }
}
