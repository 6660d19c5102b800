//! Library results checked against independent computations: explicit
//! inverses for the Schur complement, the symmetric `σ^½ Ω σ^½` route for
//! symplectic eigenvalues, and constants frozen from a separate numpy run.

use cvsteer::steering::Direction;
use cvsteer::*;
use nalgebra::DMatrix;

const R: f64 = 0.339;

fn omega(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i / 2 != j / 2 {
            0.0
        } else if i + 1 == j && i % 2 == 0 {
            1.0
        } else if j + 1 == i && j % 2 == 0 {
            -1.0
        } else {
            0.0
        }
    })
}

/// `ν²` are the doubly-degenerate eigenvalues of `−(σ^½ Ω σ^½)²`.
fn nus_symmetric_route(m: &DMatrix<f64>) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let k = &root * omega(m.nrows() / 2) * &root;
    let mut sq: Vec<f64> = (-(&k * &k))
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    sq.sort_by(f64::total_cmp);
    sq.chunks(2).map(|p| (0.5 * (p[0] + p[1])).sqrt()).collect()
}

/// `Ωσ` general eigenproblem.
fn nus_general(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = (omega(m.nrows() / 2) * m)
        .complex_eigenvalues()
        .iter()
        .map(|z| z.im.abs())
        .collect();
    v.sort_by(f64::total_cmp);
    v.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

fn idx(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

fn schur_explicit(m: &DMatrix<f64>, a: &[usize], b: &[usize]) -> DMatrix<f64> {
    let (ai, bi) = (idx(a), idx(b));
    let am = m.select_rows(&ai).select_columns(&ai);
    let bm = m.select_rows(&bi).select_columns(&bi);
    let cm = m.select_rows(&ai).select_columns(&bi);
    bm - cm.transpose() * am.try_inverse().unwrap() * cm
}

fn steering_oracle(m: &DMatrix<f64>, a: &[usize], b: &[usize]) -> f64 {
    let nus = nus_general(&schur_explicit(m, a, b));
    nus.iter()
        .filter(|&&n| n < 1.0 - 1e-10)
        .map(|n| -n.ln())
        .sum::<f64>()
        .max(0.0)
}

fn state(eta: f64) -> CovarianceMatrix {
    prepare_state(&GhzConfig::default().with_eta(eta)).unwrap()
}

#[test]
fn ghz_matrix_matches_frozen_entries() {
    let cm = state(1.0);
    let (a, p, c) = (0.99506546747, 1.482499694681, 0.48743422721);
    for i in 0..3 {
        assert!((cm.get(2 * i, 2 * i) - a).abs() < 1e-10);
        assert!((cm.get(2 * i + 1, 2 * i + 1) - p).abs() < 1e-10);
        for j in 0..3 {
            if i != j {
                assert!((cm.get(2 * i, 2 * j) - c).abs() < 1e-10);
                assert!((cm.get(2 * i + 1, 2 * j + 1) + c).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn symplectic_eigenvalues_agree_with_symmetric_route() {
    for eta in [1.0, 0.7, 0.3, 0.0] {
        let cm = state(eta);
        let lib = symplectic_eigenvalues(&cm).unwrap();
        let oracle = nus_symmetric_route(cm.matrix());
        for (a, b) in lib.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "eta={eta}: {lib:?} vs {oracle:?}");
        }
        for modes in [[0, 1], [1, 2], [0, 2]] {
            let sub = reduce(&cm, &modes).unwrap();
            let lib = symplectic_eigenvalues(&sub).unwrap();
            let oracle = nus_symmetric_route(sub.matrix());
            for (a, b) in lib.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn pure_ghz_symplectic_spectrum() {
    for nu in symplectic_eigenvalues(&state(1.0)).unwrap() {
        assert!((nu - 1.0).abs() < 1e-9);
    }
}

#[test]
fn schur_complement_matches_explicit_inverse() {
    for eta in [1.0, 0.5] {
        let cm = state(eta);
        for d in Direction::ALL {
            let (a, b) = d.modes();
            let lib = schur_complement(&cm, &d.partition()).unwrap();
            let oracle = schur_explicit(cm.matrix(), a, b);
            assert!((lib.matrix() - oracle).amax() < 1e-12);
        }
    }
}

#[test]
fn one_to_one_conditional_state_at_full_transmission() {
    let cm = state(1.0);
    let s = schur_complement(&cm, &Direction::AtoB.partition()).unwrap();
    assert!((s.get(0, 0) - 0.756295121575).abs() < 1e-11);
    assert!((s.get(1, 1) - 1.322235158567).abs() < 1e-11);
    assert!((s.determinant() - 1.0).abs() < 1e-12);
}

#[test]
fn steering_matches_general_eigen_solve() {
    for eta in [1.0, 0.9, 0.7, 0.5, 0.3, 0.1] {
        let cm = state(eta);
        let report = steering_report(&cm).unwrap();
        for d in Direction::ALL {
            let (a, b) = d.modes();
            let oracle = steering_oracle(cm.matrix(), a, b);
            assert!(
                (report.get(d) - oracle).abs() < 1e-9,
                "{} eta={eta}",
                d.label()
            );
        }
    }
}

#[test]
fn frozen_sweep_values() {
    // From an independent numpy implementation.
    let expected = [
        (0.3, [0.0, 0.050627, 0.095176, 0.058805, 0.095176, 0.058805]),
        (0.5, [0.0, 0.087567, 0.128332, 0.097288, 0.128332, 0.097288]),
        (
            0.7,
            [0.076912, 0.127539, 0.156692, 0.135718, 0.156692, 0.135718],
        ),
    ];
    for (eta, values) in expected {
        let report = steering_report(&state(eta)).unwrap();
        for (d, v) in Direction::ONE_VS_TWO.iter().zip(values) {
            assert!((report.get(*d) - v).abs() < 1e-6, "{} eta={eta}", d.label());
        }
    }
}

#[test]
fn one_vs_two_closed_form() {
    let (m, p) = ((-2.0 * R).exp(), (2.0 * R).exp());
    let closed = 0.5 * ((2.0 * m + p) * (m + 2.0 * p) / 9.0).ln();
    assert!((closed - 0.194391449202694).abs() < 1e-14);
    let report = steering_report(&state(1.0)).unwrap();
    assert!((report.get(Direction::AtoBC) - closed).abs() < 1e-12);
}

#[test]
fn two_mode_squeezed_state() {
    let (c, s) = ((2.0 * R).cosh(), (2.0 * R).sinh());
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        c, 0.0, s, 0.0,
        0.0, c, 0.0, -s,
        s, 0.0, c, 0.0,
        0.0, -s, 0.0, c,
    ]);
    let cm = CovarianceMatrix::new(m.clone()).unwrap();
    let g = gaussian_steering(&cm, &Partition::new(vec![0], vec![1]).unwrap()).unwrap();
    assert!((g - (2.0 * R).cosh().ln()).abs() < 1e-12);
    assert!((g - steering_oracle(&m, &[0], &[1])).abs() < 1e-12);
}
