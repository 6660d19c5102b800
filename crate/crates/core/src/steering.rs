//! Gaussian steering quantifier and the CKW-type monogamy residuals.
//!
//! For a split of modes into a steering party `A` and a steered party `B`,
//!
//! ```text
//! G(A → B) = max{0, −Σ_{ν̄ⱼ < 1} ln ν̄ⱼ}
//! ```
//!
//! where `ν̄ⱼ` are the symplectic eigenvalues of the Schur complement
//! `B − Cᵀ A⁻¹ C`. For three modes `(A', B, C)` there are six one-to-one
//! and six one-versus-two directions.

use rayon::prelude::*;
use serde::ser::{Serialize, SerializeMap, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::network::{prepare_state, GhzConfig, MODE_A, MODE_B, MODE_C};
use crate::symplectic::{
    schur_complement, symplectic_eigenvalues, CovarianceMatrix, Partition, BOUNDARY_CLAMP,
};

/// `G` above this value counts as steering.
pub const STEERING_THRESHOLD: f64 = 1e-8;

/// Residuals above `-MONOGAMY_TOL` satisfy the monogamy inequalities.
pub const MONOGAMY_TOL: f64 = 1e-10;

/// Lower end of the threshold-search bracket.
pub const THRESHOLD_BRACKET_LO: f64 = 1e-6;

/// Default η-resolution of the threshold search.
pub const THRESHOLD_TOL: f64 = 1e-4;

/// `G` for the given directed split.
pub fn gaussian_steering(cm: &CovarianceMatrix, partition: &Partition) -> Result<f64> {
    let conditional = schur_complement(cm, partition)?;
    let nus = symplectic_eigenvalues(&conditional)?;
    let sum: f64 = nus
        .iter()
        .filter(|&&nu| nu < 1.0 - BOUNDARY_CLAMP)
        .map(|nu| -nu.ln())
        .sum();
    Ok(sum.max(0.0))
}

/// The twelve directed bipartitions of a three-mode state `(A', B, C)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    AtoB,
    BtoA,
    AtoC,
    CtoA,
    BtoC,
    CtoB,
    AtoBC,
    BCtoA,
    BtoAC,
    ACtoB,
    CtoAB,
    ABtoC,
}

impl Direction {
    /// Canonical order; also the column order of sweep tables.
    pub const ALL: [Direction; 12] = [
        Direction::AtoB,
        Direction::BtoA,
        Direction::AtoC,
        Direction::CtoA,
        Direction::BtoC,
        Direction::CtoB,
        Direction::AtoBC,
        Direction::BCtoA,
        Direction::BtoAC,
        Direction::ACtoB,
        Direction::CtoAB,
        Direction::ABtoC,
    ];

    pub const ONE_TO_ONE: [Direction; 6] = [
        Direction::AtoB,
        Direction::BtoA,
        Direction::AtoC,
        Direction::CtoA,
        Direction::BtoC,
        Direction::CtoB,
    ];

    pub const ONE_VS_TWO: [Direction; 6] = [
        Direction::AtoBC,
        Direction::BCtoA,
        Direction::BtoAC,
        Direction::ACtoB,
        Direction::CtoAB,
        Direction::ABtoC,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// `(steering modes, steered modes)`.
    pub fn modes(self) -> (&'static [usize], &'static [usize]) {
        use Direction::*;
        match self {
            AtoB => (&[MODE_A], &[MODE_B]),
            BtoA => (&[MODE_B], &[MODE_A]),
            AtoC => (&[MODE_A], &[MODE_C]),
            CtoA => (&[MODE_C], &[MODE_A]),
            BtoC => (&[MODE_B], &[MODE_C]),
            CtoB => (&[MODE_C], &[MODE_B]),
            AtoBC => (&[MODE_A], &[MODE_B, MODE_C]),
            BCtoA => (&[MODE_B, MODE_C], &[MODE_A]),
            BtoAC => (&[MODE_B], &[MODE_A, MODE_C]),
            ACtoB => (&[MODE_A, MODE_C], &[MODE_B]),
            CtoAB => (&[MODE_C], &[MODE_A, MODE_B]),
            ABtoC => (&[MODE_A, MODE_B], &[MODE_C]),
        }
    }

    pub fn partition(self) -> Partition {
        let (steering, steered) = self.modes();
        Partition::new(steering.to_vec(), steered.to_vec()).expect("canonical partitions are valid")
    }

    /// Label such as `"BC->A"`; `A` always denotes the post-channel mode A'.
    pub fn label(self) -> &'static str {
        use Direction::*;
        match self {
            AtoB => "A->B",
            BtoA => "B->A",
            AtoC => "A->C",
            CtoA => "C->A",
            BtoC => "B->C",
            CtoB => "C->B",
            AtoBC => "A->BC",
            BCtoA => "BC->A",
            BtoAC => "B->AC",
            ACtoB => "AC->B",
            CtoAB => "C->AB",
            ABtoC => "AB->C",
        }
    }

    /// Column name such as `"G_BCtoA"`.
    pub fn column(self) -> String {
        format!("G_{}", self.label().replace("->", "to"))
    }

    pub fn parse(s: &str) -> Option<Direction> {
        let norm = s.trim().replace('\'', "");
        Self::ALL
            .into_iter()
            .find(|d| d.label() == norm || d.column() == norm || d.column()[2..] == norm)
    }

    pub fn reversed(self) -> Direction {
        let (steering, steered) = self.modes();
        Self::ALL
            .into_iter()
            .find(|d| d.modes() == (steered, steering))
            .expect("every direction has a reverse")
    }
}

/// The twelve directed steering values of one three-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringReport {
    /// Channel efficiency the state was prepared with, when known.
    pub eta: Option<f64>,
    values: [f64; 12],
}

impl SteeringReport {
    pub fn get(&self, direction: Direction) -> f64 {
        self.values[direction.index()]
    }

    pub fn values(&self) -> &[f64; 12] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Direction, f64)> + '_ {
        Direction::ALL.into_iter().map(|d| (d, self.get(d)))
    }

    pub fn steerable(&self, direction: Direction) -> bool {
        self.get(direction) > STEERING_THRESHOLD
    }
}

struct LabelledValues<'a>(&'a [f64; 12]);

impl Serialize for LabelledValues<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(12))?;
        for d in Direction::ALL {
            map.serialize_entry(d.label(), &self.0[d.index()])?;
        }
        map.end()
    }
}

impl Serialize for SteeringReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SteeringReport", 2)?;
        s.serialize_field("eta", &self.eta)?;
        s.serialize_field("g", &LabelledValues(&self.values))?;
        s.end()
    }
}

fn check_three_modes(cm: &CovarianceMatrix) -> Result<()> {
    if cm.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: cm.dim(),
        });
    }
    Ok(())
}

/// All twelve directed values for a three-mode state.
pub fn steering_report(cm: &CovarianceMatrix) -> Result<SteeringReport> {
    check_three_modes(cm)?;
    let mut values = [0.0; 12];
    for d in Direction::ALL {
        values[d.index()] = gaussian_steering(cm, &d.partition())?;
    }
    Ok(SteeringReport { eta: None, values })
}

/// One side of a monogamy inequality for a fixed mode `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum MonogamyKind {
    /// `G(k → ij) − G(k → i) − G(k → j)`.
    #[serde(rename = "out")]
    Outgoing,
    /// `G(ij → k) − G(i → k) − G(j → k)`.
    #[serde(rename = "in")]
    Incoming,
}

/// The six CKW-type residuals, ordered `(A out, A in, B out, B in, C out, C in)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MonogamyReport {
    pub residuals: [f64; 6],
}

impl MonogamyReport {
    pub const COLUMNS: [&'static str; 6] = [
        "res_A_out",
        "res_A_in",
        "res_B_out",
        "res_B_in",
        "res_C_out",
        "res_C_in",
    ];

    pub fn from_report(report: &SteeringReport) -> Self {
        use Direction::*;
        let g = |d| report.get(d);
        Self {
            residuals: [
                g(AtoBC) - g(AtoB) - g(AtoC),
                g(BCtoA) - g(BtoA) - g(CtoA),
                g(BtoAC) - g(BtoA) - g(BtoC),
                g(ACtoB) - g(AtoB) - g(CtoB),
                g(CtoAB) - g(CtoA) - g(CtoB),
                g(ABtoC) - g(AtoC) - g(BtoC),
            ],
        }
    }

    pub fn get(&self, mode: usize, kind: MonogamyKind) -> f64 {
        let offset = match kind {
            MonogamyKind::Outgoing => 0,
            MonogamyKind::Incoming => 1,
        };
        self.residuals[2 * mode + offset]
    }

    pub fn min(&self) -> f64 {
        self.residuals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self) -> bool {
        self.min() >= -MONOGAMY_TOL
    }
}

pub fn monogamy_residuals(cm: &CovarianceMatrix) -> Result<MonogamyReport> {
    Ok(MonogamyReport::from_report(&steering_report(cm)?))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub eta: f64,
    pub steering: SteeringReport,
    pub monogamy: MonogamyReport,
}

/// Analytic steering and monogamy values along a grid of channel
/// efficiencies. Rows come back in grid order.
pub fn sweep_eta(config: &GhzConfig, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if let Some(&bad) = grid.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::OutOfRange {
            name: "eta",
            value: bad,
            range: "[0, 1]",
        });
    }
    grid.par_iter()
        .map(|&eta| {
            let cm = prepare_state(&config.with_eta(eta))?;
            let mut steering = steering_report(&cm)?;
            steering.eta = Some(eta);
            let monogamy = MonogamyReport::from_report(&steering);
            Ok(SweepRow {
                eta,
                steering,
                monogamy,
            })
        })
        .collect()
}

/// Uniform grid `start, start + step, …` up to `stop` inclusive.
pub fn eta_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 {
        return Err(Error::OutOfRange {
            name: "step",
            value: step,
            range: "(0, inf)",
        });
    }
    let n = ((stop - start) / step + 1e-9).floor();
    if n.is_nan() || n < 0.0 {
        return Err(Error::OutOfRange {
            name: "stop",
            value: stop,
            range: "[start, inf)",
        });
    }
    // Multiplying rather than accumulating keeps 0.05-steps landing on 0.3 etc.
    let grid: Vec<f64> = (0..=n as usize)
        .map(|i| {
            let v = start + i as f64 * step;
            (v * 1e12).round() / 1e12
        })
        .collect();
    if let Some(&bad) = grid.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::OutOfRange {
            name: "eta",
            value: bad,
            range: "[0, 1]",
        });
    }
    Ok(grid)
}

/// Smallest channel efficiency at which `direction` becomes steerable,
/// located by bisection on `[1e-6, 1]` to an η-resolution of `tol`.
pub fn find_threshold(config: &GhzConfig, direction: Direction, tol: f64) -> Result<f64> {
    let partition = direction.partition();
    let g = |eta: f64| -> Result<f64> {
        gaussian_steering(&prepare_state(&config.with_eta(eta))?, &partition)
    };
    let (mut lo, mut hi) = (THRESHOLD_BRACKET_LO, 1.0);
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if g_lo > STEERING_THRESHOLD || g_hi <= STEERING_THRESHOLD {
        return Err(Error::NoThreshold(format!(
            "{}: G({lo:e}) = {g_lo:.3e}, G(1) = {g_hi:.3e}",
            direction.label()
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > STEERING_THRESHOLD {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
