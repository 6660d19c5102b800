//! Preparation of the tripartite GHZ state and the lossy channel on mode A.
//!
//! Three squeezed vacua (`a1` and `a3` amplitude-squeezed, `a2`
//! phase-squeezed) are mixed on the network
//! `U = B23(T2) · I2(-1) · B12(T1)`, which for `T1 = 1/3`, `T2 = 1/2` gives
//!
//! ```text
//! A =  √(2/3) a1 + √(1/3) a2
//! B = -√(1/6) a1 + √(1/3) a2 + √(1/2) a3
//! C = -√(1/6) a1 + √(1/3) a2 - √(1/2) a3
//! ```
//!
//! Output modes are indexed `A = 0`, `B = 1`, `C = 2`.

use std::fmt;

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{symmetrize, CovarianceMatrix, SymplecticMatrix};

pub const MODE_A: usize = 0;
pub const MODE_B: usize = 1;
pub const MODE_C: usize = 2;

/// Squeezing parameter of the experiment (−2.94 dB).
pub const DEFAULT_SQUEEZING: f64 = 0.339;

/// Squeezing in dB (noise reduction, positive) for parameter `r`.
pub fn squeezing_to_db(r: f64) -> f64 {
    -10.0 * (-2.0 * r).exp().log10()
}

/// Squeezing parameter for a noise reduction of `db` decibels. The sign of
/// `db` is ignored, so "-2.94 dB" and "2.94 dB" both mean the same squeezer.
pub fn db_to_squeezing(db: f64) -> f64 {
    db.abs() * std::f64::consts::LN_10 / 20.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quadrature {
    #[serde(rename = "x")]
    X,
    #[serde(rename = "p")]
    P,
}

impl Quadrature {
    fn offset(self) -> usize {
        match self {
            Quadrature::X => 0,
            Quadrature::P => 1,
        }
    }
}

/// Parameters of the GHZ preparation and distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzConfig {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub t1: f64,
    pub t2: f64,
    /// Channel transmission efficiency applied to mode A.
    pub eta: f64,
    /// Extra per-mode efficiency (e.g. detection), applied after the
    /// channel. All ones by default, i.e. off.
    pub extra_efficiency: [f64; 3],
}

impl Default for GhzConfig {
    fn default() -> Self {
        Self::symmetric(DEFAULT_SQUEEZING)
    }
}

impl GhzConfig {
    /// Identical squeezing on all three inputs, ideal network, no loss.
    pub fn symmetric(r: f64) -> Self {
        Self {
            r1: r,
            r2: r,
            r3: r,
            t1: 1.0 / 3.0,
            t2: 0.5,
            eta: 1.0,
            extra_efficiency: [1.0; 3],
        }
    }

    pub fn from_squeezing_db(db: f64) -> Self {
        Self::symmetric(db_to_squeezing(db))
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("r1", self.r1), ("r2", self.r2), ("r3", self.r3)] {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::OutOfRange {
                    name,
                    value: r,
                    range: "[0, inf)",
                });
            }
        }
        check_unit("t1", self.t1)?;
        check_unit("t2", self.t2)?;
        check_unit("eta", self.eta)?;
        for &e in &self.extra_efficiency {
            check_unit("extra_efficiency", e)?;
        }
        Ok(())
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

/// One signed quadrature in a linear combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub mode: usize,
    pub quadrature: Quadrature,
    pub sign: i8,
}

/// Signed sum of quadratures such as `x_A − x_B` or `p_A + p_B + p_C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadCombo {
    terms: Vec<Term>,
}

impl QuadCombo {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidCombo("empty combination".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.sign != 1 && t.sign != -1 {
                return Err(Error::InvalidCombo(format!("sign {} is not ±1", t.sign)));
            }
            if terms[..i]
                .iter()
                .any(|u| u.mode == t.mode && u.quadrature == t.quadrature)
            {
                return Err(Error::InvalidCombo(format!(
                    "quadrature {:?} of mode {} repeated",
                    t.quadrature, t.mode
                )));
            }
        }
        Ok(Self { terms })
    }

    pub fn single(mode: usize, quadrature: Quadrature) -> Self {
        Self {
            terms: vec![Term {
                mode,
                quadrature,
                sign: 1,
            }],
        }
    }

    /// `q_i ± q_j` for two distinct quadratures.
    pub fn pair(first: (usize, Quadrature), sign: i8, second: (usize, Quadrature)) -> Result<Self> {
        Self::new(vec![
            Term {
                mode: first.0,
                quadrature: first.1,
                sign: 1,
            },
            Term {
                mode: second.0,
                quadrature: second.1,
                sign,
            },
        ])
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Coefficient vector `v` such that the combination is `v · ξ`.
    pub fn indicator(&self, n_modes: usize) -> Result<DVector<f64>> {
        let mut v = DVector::zeros(2 * n_modes);
        for t in &self.terms {
            if t.mode >= n_modes {
                return Err(Error::ModeOutOfRange {
                    index: t.mode,
                    n_modes,
                });
            }
            v[2 * t.mode + t.quadrature.offset()] = f64::from(t.sign);
        }
        Ok(v)
    }
}

impl fmt::Display for QuadCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            let q = match t.quadrature {
                Quadrature::X => "x",
                Quadrature::P => "p",
            };
            match (i, t.sign) {
                (0, -1) => write!(f, "-")?,
                (0, _) => {}
                (_, -1) => write!(f, "-")?,
                _ => write!(f, "+")?,
            }
            write!(f, "{q}{}", mode_label(t.mode))?;
        }
        Ok(())
    }
}

/// Letter used for an output mode in labels and column names.
pub fn mode_label(mode: usize) -> char {
    match mode {
        MODE_A => 'A',
        MODE_B => 'B',
        MODE_C => 'C',
        m => char::from_digit(m as u32, 36).unwrap_or('?'),
    }
}

/// Single-mode squeezed vacuum: `diag(e^{-2r}, e^{2r})` when `x` is squeezed.
pub fn squeezed_vacuum_cm(r: f64, squeezed: Quadrature) -> Result<CovarianceMatrix> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            range: "[0, inf)",
        });
    }
    let (lo, hi) = ((-2.0 * r).exp(), (2.0 * r).exp());
    let (vx, vp) = match squeezed {
        Quadrature::X => (lo, hi),
        Quadrature::P => (hi, lo),
    };
    CovarianceMatrix::from_row_slice(2, &[vx, 0.0, 0.0, vp])
}

/// 2×2 mode-space beam-splitter with the element convention
/// `B_kk = √(1−t)`, `B_kl = B_lk = √t`, `B_ll = −√(1−t)`.
fn beam_splitter_block(t: f64) -> [[f64; 2]; 2] {
    let (refl, trans) = ((1.0 - t).sqrt(), t.sqrt());
    [[refl, trans], [trans, -refl]]
}

/// Beam splitter of transmittance `t` between modes `k` and `l`, acting
/// identically on the `x` and `p` sectors.
pub fn beam_splitter_symplectic(
    n_modes: usize,
    k: usize,
    l: usize,
    t: f64,
) -> Result<SymplecticMatrix> {
    for index in [k, l] {
        if index >= n_modes {
            return Err(Error::ModeOutOfRange { index, n_modes });
        }
    }
    if k == l {
        return Err(Error::InvalidPartition(format!(
            "beam splitter on a single mode {k}"
        )));
    }
    check_unit("t", t)?;
    let block = beam_splitter_block(t);
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let modes = [k, l];
    for q in 0..2 {
        for (i, &mi) in modes.iter().enumerate() {
            for (j, &mj) in modes.iter().enumerate() {
                s[(2 * mi + q, 2 * mj + q)] = block[i][j];
            }
        }
    }
    Ok(SymplecticMatrix::from_trusted(s))
}

/// 180° phase-space rotation of mode `k`: `(x, p) → (−x, −p)`.
pub fn phase_flip_symplectic(n_modes: usize, k: usize) -> Result<SymplecticMatrix> {
    if k >= n_modes {
        return Err(Error::ModeOutOfRange { index: k, n_modes });
    }
    let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
    s[(2 * k, 2 * k)] = -1.0;
    s[(2 * k + 1, 2 * k + 1)] = -1.0;
    Ok(SymplecticMatrix::from_trusted(s))
}

/// Gaussian unitary action `σ → S σ Sᵀ`.
pub fn apply_symplectic(cm: &CovarianceMatrix, s: &SymplecticMatrix) -> Result<CovarianceMatrix> {
    if s.n_modes() != cm.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: cm.dim(),
            found: s.matrix().nrows(),
        });
    }
    let m = s.matrix();
    CovarianceMatrix::new(symmetrize(m * cm.matrix() * m.transpose()))
}

/// Symplectic matrix of the three-mode network `B23(t2) · I2(−1) · B12(t1)`.
pub fn network_symplectic(t1: f64, t2: f64) -> Result<SymplecticMatrix> {
    let b12 = beam_splitter_symplectic(3, MODE_A, MODE_B, t1)?;
    let flip = phase_flip_symplectic(3, MODE_B)?;
    let b23 = beam_splitter_symplectic(3, MODE_B, MODE_C, t2)?;
    b23.compose(&flip)?.compose(&b12)
}

/// Mode-space (3×3) matrix of the network, read from the `x` sector.
pub fn network_matrix(t1: f64, t2: f64) -> Result<Matrix3<f64>> {
    let s = network_symplectic(t1, t2)?;
    Ok(Matrix3::from_fn(|i, j| s.matrix()[(2 * i, 2 * j)]))
}

/// Pure three-mode GHZ covariance matrix before any loss, modes `(A, B, C)`.
pub fn build_ghz(config: &GhzConfig) -> Result<CovarianceMatrix> {
    config.validate()?;
    let inputs = CovarianceMatrix::direct_sum(&[
        squeezed_vacuum_cm(config.r1, Quadrature::X)?,
        squeezed_vacuum_cm(config.r2, Quadrature::P)?,
        squeezed_vacuum_cm(config.r3, Quadrature::X)?,
    ]);
    apply_symplectic(&inputs, &network_symplectic(config.t1, config.t2)?)
}

/// The distributed state `σ_{A'BC}`: GHZ preparation, the channel on mode A,
/// then any extra per-mode efficiencies.
pub fn prepare_state(config: &GhzConfig) -> Result<CovarianceMatrix> {
    let mut cm = lossy_channel(&build_ghz(config)?, MODE_A, config.eta)?;
    for (mode, &e) in config.extra_efficiency.iter().enumerate() {
        if e != 1.0 {
            cm = lossy_channel(&cm, mode, e)?;
        }
    }
    Ok(cm)
}

/// Pure-loss channel `a → √η a + √(1−η) v` on one mode.
pub fn lossy_channel(cm: &CovarianceMatrix, mode: usize, eta: f64) -> Result<CovarianceMatrix> {
    check_unit("eta", eta)?;
    if mode >= cm.n_modes() {
        return Err(Error::ModeOutOfRange {
            index: mode,
            n_modes: cm.n_modes(),
        });
    }
    let mut m = cm.matrix().clone();
    let gain = eta.sqrt();
    for q in [2 * mode, 2 * mode + 1] {
        m.row_mut(q).scale_mut(gain);
        m.column_mut(q).scale_mut(gain);
        m[(q, q)] += 1.0 - eta;
    }
    CovarianceMatrix::new(m)
}

/// Variance of a signed quadrature sum, `vᵀ σ v`.
pub fn correlation_variance(cm: &CovarianceMatrix, combo: &QuadCombo) -> Result<f64> {
    let v = combo.indicator(cm.n_modes())?;
    Ok((cm.matrix() * &v).dot(&v))
}

/// The four correlation variances characterizing the GHZ state:
/// `Δ²(x_A−x_B)`, `Δ²(x_A−x_C)`, `Δ²(x_B−x_C)` and `Δ²(p_A+p_B+p_C)`.
pub fn ghz_correlations(cm: &CovarianceMatrix) -> Result<[(QuadCombo, f64); 4]> {
    use Quadrature::{P, X};
    let combos = [
        QuadCombo::pair((MODE_A, X), -1, (MODE_B, X))?,
        QuadCombo::pair((MODE_A, X), -1, (MODE_C, X))?,
        QuadCombo::pair((MODE_B, X), -1, (MODE_C, X))?,
        QuadCombo::new(
            [MODE_A, MODE_B, MODE_C]
                .iter()
                .map(|&mode| Term {
                    mode,
                    quadrature: P,
                    sign: 1,
                })
                .collect(),
        )?,
    ];
    let mut out = Vec::with_capacity(4);
    for c in combos {
        let v = correlation_variance(cm, &c)?;
        out.push((c, v));
    }
    Ok(out.try_into().expect("four combos"))
}
