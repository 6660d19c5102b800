//! Covariance-matrix algebra for Gaussian states.
//!
//! Conventions used throughout the crate:
//!
//! * Quadratures are `x = a + a†` and `p = (a - a†)/i`, so the vacuum has
//!   unit variance in both quadratures (shot-noise units). A conditional
//!   symplectic eigenvalue below 1 therefore signals steering directly.
//! * Storage order is interleaved, `(x1, p1, x2, p2, ...)`. The symplectic
//!   form is block diagonal, `⊕ [[0, 1], [-1, 0]]`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default tolerance on the uncertainty relation `ν ≥ 1`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Largest condition number accepted for the steering-party block.
pub const MAX_CONDITION: f64 = 1e12;

/// Symplectic eigenvalues this close to 1 are snapped to exactly 1 before
/// they reach the steering quantifier.
pub const BOUNDARY_CLAMP: f64 = 1e-10;

/// Real symmetric `2N × 2N` covariance matrix of an `N`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a square matrix of even dimension, symmetrizing it on the way in.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        if rows == 0 || rows % 2 != 0 {
            return Err(Error::NotAState(format!(
                "dimension {rows} is not a positive even number"
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotAState("non-finite entry".into()));
        }
        Ok(Self {
            n_modes: rows / 2,
            entries: symmetrize(entries),
        })
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    /// The `n`-mode vacuum, `σ = 1`.
    pub fn vacuum(n_modes: usize) -> Self {
        assert!(n_modes >= 1, "a state needs at least one mode");
        Self {
            n_modes,
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Block-diagonal joint state of independent subsystems.
    pub fn direct_sum(parts: &[CovarianceMatrix]) -> Self {
        let n_modes: usize = parts.iter().map(|p| p.n_modes).sum();
        let mut entries = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        let mut offset = 0;
        for part in parts {
            let d = part.dim();
            entries
                .view_mut((offset, offset), (d, d))
                .copy_from(&part.entries);
            offset += d;
        }
        Self { n_modes, entries }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    fn check_mode(&self, index: usize) -> Result<()> {
        if index >= self.n_modes {
            Err(Error::ModeOutOfRange {
                index,
                n_modes: self.n_modes,
            })
        } else {
            Ok(())
        }
    }
}

/// Ordered pair of disjoint mode sets: who steers, and who is steered.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    steering: Vec<usize>,
    steered: Vec<usize>,
}

impl Partition {
    pub fn new(steering: Vec<usize>, steered: Vec<usize>) -> Result<Self> {
        if steering.is_empty() || steered.is_empty() {
            return Err(Error::InvalidPartition("both parties need a mode".into()));
        }
        let mut all: Vec<usize> = steering.iter().chain(&steered).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPartition(format!(
                "parties overlap or repeat a mode: {steering:?} / {steered:?}"
            )));
        }
        Ok(Self { steering, steered })
    }

    pub fn steering(&self) -> &[usize] {
        &self.steering
    }

    pub fn steered(&self) -> &[usize] {
        &self.steered
    }

    /// The same split with the roles exchanged.
    pub fn reversed(&self) -> Self {
        Self {
            steering: self.steered.clone(),
            steered: self.steering.clone(),
        }
    }

    fn validate_for(&self, n_modes: usize) -> Result<()> {
        match self
            .steering
            .iter()
            .chain(&self.steered)
            .find(|&&m| m >= n_modes)
        {
            Some(&index) => Err(Error::ModeOutOfRange { index, n_modes }),
            None => Ok(()),
        }
    }
}

/// A real matrix `S` with `S Ω Sᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl SymplecticMatrix {
    /// Validates `S Ω Sᵀ = Ω` to 1e-12, relative to `‖S‖²` for strongly
    /// squeezing transformations.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 || rows % 2 != 0 {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        let n_modes = rows / 2;
        let omega = symplectic_form(n_modes);
        let deviation = (&entries * &omega * entries.transpose() - &omega).amax();
        let scale = entries.norm_squared().max(1.0);
        if deviation > 1e-12 * scale {
            return Err(Error::NotSymplectic(deviation));
        }
        Ok(Self { n_modes, entries })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            n_modes,
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub(crate) fn from_trusted(entries: DMatrix<f64>) -> Self {
        let n_modes = entries.nrows() / 2;
        Self { n_modes, entries }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Composition `self · other` (apply `other` first).
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<SymplecticMatrix> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.entries.nrows(),
                found: other.entries.nrows(),
            });
        }
        Ok(Self::from_trusted(&self.entries * &other.entries))
    }
}

/// Canonical symplectic form `⊕ₖ [[0, 1], [-1, 0]]` in interleaved order.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    assert!(n_modes >= 1, "symplectic form needs at least one mode");
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues of `σ`, sorted ascending.
///
/// One and two modes use the closed forms `√det σ` and the roots of
/// `ν⁴ − Δν² + det σ`; larger states go through a general eigen-solve of
/// `Ωσ`, whose spectrum is `{±iνₖ}`.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    let m = cm.matrix();
    if m.clone().cholesky().is_none() {
        return Err(Error::NotAState(
            "covariance matrix is not positive definite".into(),
        ));
    }
    let mut nus = match cm.n_modes() {
        1 => vec![two_by_two_det(m, 0, 0).sqrt()],
        2 => {
            let delta =
                two_by_two_det(m, 0, 0) + two_by_two_det(m, 2, 2) + 2.0 * two_by_two_det(m, 0, 2);
            let det = m.determinant();
            let disc = delta * delta - 4.0 * det;
            // A double root loses half its digits in the square root; pure
            // two-mode states land there, so hand them to the eigen-solver.
            if disc > NEAR_DEGENERATE * delta * delta {
                let hi = 0.5 * (delta + disc.sqrt());
                // det / hi avoids cancellation in the smaller root.
                vec![(det / hi).sqrt(), hi.sqrt()]
            } else {
                omega_sigma_moduli(m)
            }
        }
        _ => omega_sigma_moduli(m),
    };
    nus.sort_by(f64::total_cmp);
    Ok(nus)
}

/// Relative discriminant below which the two-mode closed form is abandoned.
const NEAR_DEGENERATE: f64 = 1e-6;

/// Moduli of the `±iν` eigenvalue pairs of `Ωσ`.
fn omega_sigma_moduli(m: &DMatrix<f64>) -> Vec<f64> {
    let omega_sigma = symplectic_form(m.nrows() / 2) * m;
    let mut moduli: Vec<f64> = omega_sigma
        .complex_eigenvalues()
        .iter()
        .map(|z| z.im.abs())
        .collect();
    moduli.sort_by(f64::total_cmp);
    moduli
        .chunks(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect()
}

fn two_by_two_det(m: &DMatrix<f64>, row: usize, col: usize) -> f64 {
    m[(row, col)] * m[(row + 1, col + 1)] - m[(row, col + 1)] * m[(row + 1, col)]
}

/// True iff the smallest symplectic eigenvalue is at least `1 - tol`.
/// Matrices that are not even positive definite are unphysical.
pub fn is_physical(cm: &CovarianceMatrix, tol: f64) -> bool {
    min_symplectic_eigenvalue(cm).is_some_and(|nu| nu >= 1.0 - tol)
}

/// Smallest symplectic eigenvalue, or `None` when `σ` is not positive definite.
pub fn min_symplectic_eigenvalue(cm: &CovarianceMatrix) -> Option<f64> {
    symplectic_eigenvalues(cm)
        .ok()
        .and_then(|v| v.first().copied())
}

/// `1/√det σ`; 1 for pure states.
pub fn purity(cm: &CovarianceMatrix) -> f64 {
    1.0 / cm.determinant().sqrt()
}

/// Covariance matrix of the listed modes, in the order given.
pub fn reduce(cm: &CovarianceMatrix, modes: &[usize]) -> Result<CovarianceMatrix> {
    if modes.is_empty() {
        return Err(Error::InvalidPartition(
            "cannot reduce to zero modes".into(),
        ));
    }
    for &m in modes {
        cm.check_mode(m)?;
    }
    let idx = quadrature_indices(modes);
    Ok(CovarianceMatrix {
        n_modes: modes.len(),
        entries: cm.matrix().select_rows(&idx).select_columns(&idx),
    })
}

/// Conditional covariance `B − Cᵀ A⁻¹ C` of the steered party after Gaussian
/// measurements on the steering party.
pub fn schur_complement(cm: &CovarianceMatrix, partition: &Partition) -> Result<CovarianceMatrix> {
    partition.validate_for(cm.n_modes())?;
    let a_idx = quadrature_indices(partition.steering());
    let b_idx = quadrature_indices(partition.steered());
    let m = cm.matrix();
    let a = m.select_rows(&a_idx).select_columns(&a_idx);
    let b = m.select_rows(&b_idx).select_columns(&b_idx);
    let c = m.select_rows(&a_idx).select_columns(&b_idx);

    let eig = a.clone().symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularSteeringBlock(condition));
    }
    let chol = a
        .cholesky()
        .ok_or(Error::SingularSteeringBlock(condition))?;
    let conditional = b - c.transpose() * chol.solve(&c);
    Ok(CovarianceMatrix {
        n_modes: partition.steered().len(),
        entries: symmetrize(conditional),
    })
}

pub(crate) fn quadrature_indices(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}
