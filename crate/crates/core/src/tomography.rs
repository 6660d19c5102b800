//! Simulated covariance-matrix reconstruction.
//!
//! Homodyne records are replaced by multivariate-normal quadrature samples.
//! From each sample table eighteen variances are estimated: the six single
//! quadratures plus twelve two-mode combinations. The partial covariance
//! matrix is then assembled with
//!
//! ```text
//! Cov(ξi, ξj) =  ½ [Δ²(ξi + ξj) − Δ²ξi − Δ²ξj]
//! Cov(ξi, ξj) = −½ [Δ²(ξi − ξj) − Δ²ξi − Δ²ξj]
//! ```
//!
//! with within-mode `x`–`p` covariances set to zero. Repeating this over a
//! few independent trials gives mean steering values with ± one standard
//! deviation error bars.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{
    correlation_variance, mode_label, QuadCombo, Quadrature, MODE_A, MODE_B, MODE_C,
};
use crate::steering::{steering_report, Direction, SteeringReport};
use crate::symplectic::{min_symplectic_eigenvalue, CovarianceMatrix};

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_TRIALS: usize = 3;

/// Floor of the trial rejection tolerance on `1 − ν_min`.
pub const MIN_REJECTION_TOL: f64 = 1e-3;

/// Sampling noise alone pulls `ν_min` of a reconstruction about `2/√n`
/// below its true value (worst of 40 runs: `4/√n`); rejection starts at
/// twice that worst case.
pub fn default_rejection_tol(n_samples: usize) -> f64 {
    (8.0 / (n_samples as f64).sqrt()).max(MIN_REJECTION_TOL)
}

/// `n × 2N` table of quadrature samples, row-major, columns in
/// interleaved order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    n_modes: usize,
    data: Vec<f64>,
}

impl SampleTable {
    pub fn new(n_modes: usize, data: Vec<f64>) -> Result<Self> {
        let width = 2 * n_modes;
        if n_modes == 0 || !data.len().is_multiple_of(width) {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: data.len() % width.max(1),
            });
        }
        Ok(Self { n_modes, data })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.data.len() / (2 * self.n_modes)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(2 * self.n_modes)
    }

    /// Column headers: `xA,pA,xB,pB,...`.
    pub fn labels(&self) -> Vec<String> {
        (0..self.n_modes)
            .flat_map(|m| {
                let l = mode_label(m);
                [format!("x{l}"), format!("p{l}")]
            })
            .collect()
    }

    /// Unbiased (n − 1) sample covariance of the columns.
    pub fn sample_covariance(&self) -> Result<DMatrix<f64>> {
        let n = self.len();
        if n < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                found: n,
            });
        }
        let width = 2 * self.n_modes;
        let mut mean = DVector::<f64>::zeros(width);
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean /= n as f64;
        let mut acc = DMatrix::<f64>::zeros(width, width);
        let mut centered = vec![0.0; width];
        for row in self.rows() {
            for ((c, v), m) in centered.iter_mut().zip(row).zip(mean.iter()) {
                *c = v - m;
            }
            for i in 0..width {
                for j in i..width {
                    acc[(i, j)] += centered[i] * centered[j];
                }
            }
        }
        acc /= (n - 1) as f64;
        acc.fill_lower_triangle_with_upper_triangle();
        Ok(acc)
    }

    /// Writes the table as CSV with a header row of quadrature labels.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.labels().join(","))?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Lower factor `L` with `L Lᵀ = σ`; Cholesky when possible, otherwise a
/// symmetric eigen-factorization so that singular PSD inputs still work.
fn symmetric_factor(cm: &CovarianceMatrix) -> Result<DMatrix<f64>> {
    if let Some(chol) = cm.matrix().clone().cholesky() {
        return Ok(chol.unpack());
    }
    let eig = cm.matrix().clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.min() < -1e-12 * scale {
        return Err(Error::NotAState(
            "covariance matrix is not positive semidefinite".into(),
        ));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

/// Draws `n_samples` zero-mean Gaussian quadrature vectors with covariance
/// `cm`. The table is a pure function of `(cm, n_samples, seed)`.
pub fn sample_quadratures(
    cm: &CovarianceMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<SampleTable> {
    if n_samples < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: n_samples,
        });
    }
    let factor = symmetric_factor(cm)?;
    let width = cm.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n_samples * width);
    let mut z = vec![0.0; width];
    for _ in 0..n_samples {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for i in 0..width {
            let mut acc = 0.0;
            for (j, zj) in z.iter().enumerate() {
                acc += factor[(i, j)] * zj;
            }
            data.push(acc);
        }
    }
    SampleTable::new(cm.n_modes(), data)
}

/// Seed of trial `trial` derived from the run seed (SplitMix64 finalizer).
pub fn child_seed(seed: u64, trial: usize) -> u64 {
    let mut z = seed.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SINGLES: [(usize, Quadrature); 6] = [
    (MODE_A, Quadrature::X),
    (MODE_A, Quadrature::P),
    (MODE_B, Quadrature::X),
    (MODE_B, Quadrature::P),
    (MODE_C, Quadrature::X),
    (MODE_C, Quadrature::P),
];

/// The twelve measured combinations, in the order
/// `x−x` (AB, AC, BC), `p−p` (AB, AC, BC), `x+p` (AB, AC, BC), `p+x` (AB, AC, BC).
type Slot = (usize, Quadrature);

const COMBOS: [(Slot, i8, Slot); 12] = {
    use Quadrature::{P, X};
    [
        ((MODE_A, X), -1, (MODE_B, X)),
        ((MODE_A, X), -1, (MODE_C, X)),
        ((MODE_B, X), -1, (MODE_C, X)),
        ((MODE_A, P), -1, (MODE_B, P)),
        ((MODE_A, P), -1, (MODE_C, P)),
        ((MODE_B, P), -1, (MODE_C, P)),
        ((MODE_A, X), 1, (MODE_B, P)),
        ((MODE_A, X), 1, (MODE_C, P)),
        ((MODE_B, X), 1, (MODE_C, P)),
        ((MODE_A, P), 1, (MODE_B, X)),
        ((MODE_A, P), 1, (MODE_C, X)),
        ((MODE_B, P), 1, (MODE_C, X)),
    ]
};

/// The eighteen homodyne variances of a three-mode state.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    /// `Δ²x_A, Δ²p_A, Δ²x_B, Δ²p_B, Δ²x_C, Δ²p_C`.
    pub singles: [f64; 6],
    /// Variances of [`MeasurementSet::combos`], same order.
    pub combos: [f64; 12],
}

impl MeasurementSet {
    pub fn new(singles: [f64; 6], combos: [f64; 12]) -> Result<Self> {
        if let Some(&bad) = singles
            .iter()
            .chain(&combos)
            .find(|v| !(**v >= 0.0 && v.is_finite()))
        {
            return Err(Error::OutOfRange {
                name: "variance",
                value: bad,
                range: "[0, inf)",
            });
        }
        Ok(Self { singles, combos })
    }

    pub fn single_combos() -> Vec<QuadCombo> {
        SINGLES
            .iter()
            .map(|&(m, q)| QuadCombo::single(m, q))
            .collect()
    }

    pub fn combos() -> Vec<QuadCombo> {
        COMBOS
            .iter()
            .map(|&(a, sign, b)| QuadCombo::pair(a, sign, b).expect("fixed combos are valid"))
            .collect()
    }

    /// All eighteen labels and values, singles first.
    pub fn entries(&self) -> Vec<(String, f64)> {
        Self::single_combos()
            .iter()
            .chain(Self::combos().iter())
            .map(ToString::to_string)
            .zip(self.singles.iter().chain(&self.combos).copied())
            .collect()
    }
}

impl Serialize for MeasurementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self.entries();
        let mut map = serializer.serialize_map(Some(entries.len()))?;
        for (k, v) in &entries {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

fn measurements_from(cov: &DMatrix<f64>) -> Result<MeasurementSet> {
    let variance = |combo: &QuadCombo| -> Result<f64> {
        let v = combo.indicator(3)?;
        Ok((cov * &v).dot(&v))
    };
    let mut singles = [0.0; 6];
    for (s, c) in singles.iter_mut().zip(MeasurementSet::single_combos()) {
        *s = variance(&c)?;
    }
    let mut combos = [0.0; 12];
    for (s, c) in combos.iter_mut().zip(MeasurementSet::combos()) {
        *s = variance(&c)?;
    }
    MeasurementSet::new(singles, combos)
}

/// Unbiased sample variances of the eighteen measured combinations.
pub fn measure_set(samples: &SampleTable) -> Result<MeasurementSet> {
    if samples.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: 2 * samples.n_modes(),
        });
    }
    measurements_from(&samples.sample_covariance()?)
}

/// Exact (population) variances of the eighteen combinations.
pub fn population_measurements(cm: &CovarianceMatrix) -> Result<MeasurementSet> {
    if cm.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: cm.dim(),
        });
    }
    let mut singles = [0.0; 6];
    for (s, c) in singles.iter_mut().zip(MeasurementSet::single_combos()) {
        *s = correlation_variance(cm, &c)?;
    }
    let mut combos = [0.0; 12];
    for (s, c) in combos.iter_mut().zip(MeasurementSet::combos()) {
        *s = correlation_variance(cm, &c)?;
    }
    MeasurementSet::new(singles, combos)
}

/// Covariance of `ξi, ξj` from `Δ²(ξi + ξj)`.
pub fn covariance_from_sum(var_sum: f64, var_i: f64, var_j: f64) -> f64 {
    0.5 * (var_sum - var_i - var_j)
}

/// Covariance of `ξi, ξj` from `Δ²(ξi − ξj)`.
pub fn covariance_from_difference(var_diff: f64, var_i: f64, var_j: f64) -> f64 {
    -0.5 * (var_diff - var_i - var_j)
}

/// Assembles the partial three-mode covariance matrix from the eighteen
/// variances. Within-mode `x`–`p` covariances are not measured and set to 0.
pub fn covariance_from_measurements(ms: &MeasurementSet) -> Result<CovarianceMatrix> {
    let index = |(mode, q): (usize, Quadrature)| {
        2 * mode
            + match q {
                Quadrature::X => 0,
                Quadrature::P => 1,
            }
    };
    let mut m = DMatrix::zeros(6, 6);
    for (k, &v) in ms.singles.iter().enumerate() {
        m[(k, k)] = v;
    }
    for (&(a, sign, b), &v) in COMBOS.iter().zip(&ms.combos) {
        let (i, j) = (index(a), index(b));
        let cov = if sign < 0 {
            covariance_from_difference(v, m[(i, i)], m[(j, j)])
        } else {
            covariance_from_sum(v, m[(i, i)], m[(j, j)])
        };
        m[(i, j)] = cov;
        m[(j, i)] = cov;
    }
    CovarianceMatrix::new(m)
}

/// Knobs of a multi-trial reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TomographyOptions {
    pub n_samples: usize,
    pub n_trials: usize,
    pub seed: u64,
    /// Trials with `ν_min < 1 − rejection_tol` are rejected.
    pub rejection_tol: f64,
}

impl TomographyOptions {
    pub fn new(n_samples: usize, n_trials: usize, seed: u64) -> Self {
        Self {
            n_samples,
            n_trials,
            seed,
            rejection_tol: default_rejection_tol(n_samples),
        }
    }
}

impl Default for TomographyOptions {
    fn default() -> Self {
        Self::new(DEFAULT_SAMPLES, DEFAULT_TRIALS, 0)
    }
}

/// One simulated reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    pub measurements: MeasurementSet,
    /// Row-major reconstructed covariance matrix.
    pub covariance: Vec<Vec<f64>>,
    pub min_symplectic_eigenvalue: Option<f64>,
    pub accepted: bool,
    /// `None` for rejected trials.
    pub steering: Option<SteeringReport>,
}

impl TrialRecord {
    pub fn covariance_matrix(&self) -> CovarianceMatrix {
        let flat: Vec<f64> = self.covariance.iter().flatten().copied().collect();
        CovarianceMatrix::from_row_slice(self.covariance.len(), &flat)
            .expect("stored matrices are well-formed")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejection {
    pub trial: usize,
    pub reason: String,
}

/// Mean and sample standard deviation of one steering direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStatistics {
    pub options: TomographyOptions,
    pub trials: Vec<TrialRecord>,
    pub rejections: Vec<Rejection>,
    aggregates: Vec<Aggregate>,
}

impl TrialStatistics {
    pub fn aggregate(&self, direction: Direction) -> Aggregate {
        self.aggregates[direction.index()]
    }

    pub fn mean(&self, direction: Direction) -> f64 {
        self.aggregate(direction).mean
    }

    pub fn std(&self, direction: Direction) -> f64 {
        self.aggregate(direction).std
    }

    pub fn accepted(&self) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(|t| t.accepted)
    }
}

/// Runs a single trial: sample, measure, reconstruct, quantify.
pub fn run_trial(
    cm_true: &CovarianceMatrix,
    options: &TomographyOptions,
    index: usize,
) -> Result<TrialRecord> {
    let seed = child_seed(options.seed, index);
    let samples = sample_quadratures(cm_true, options.n_samples, seed)?;
    let measurements = measure_set(&samples)?;
    let cm = covariance_from_measurements(&measurements)?;
    let nu_min = min_symplectic_eigenvalue(&cm);
    let accepted = nu_min.is_some_and(|nu| nu >= 1.0 - options.rejection_tol);
    let steering = if accepted {
        Some(steering_report(&cm)?)
    } else {
        None
    };
    Ok(TrialRecord {
        index,
        seed,
        measurements,
        covariance: cm
            .matrix()
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
        min_symplectic_eigenvalue: nu_min,
        accepted,
        steering,
    })
}

/// Independent reconstructions of `cm_true` with the default rejection
/// tolerance for `n_samples`.
pub fn reconstruct_trials(
    cm_true: &CovarianceMatrix,
    n_samples: usize,
    n_trials: usize,
    seed: u64,
) -> Result<TrialStatistics> {
    reconstruct_trials_with(cm_true, &TomographyOptions::new(n_samples, n_trials, seed))
}

pub fn reconstruct_trials_with(
    cm_true: &CovarianceMatrix,
    options: &TomographyOptions,
) -> Result<TrialStatistics> {
    if cm_true.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: cm_true.dim(),
        });
    }
    if options.n_trials < 2 {
        return Err(Error::Tomography(format!(
            "need at least 2 trials for a standard deviation, got {}",
            options.n_trials
        )));
    }
    let trials: Vec<TrialRecord> = (0..options.n_trials)
        .into_par_iter()
        .map(|t| run_trial(cm_true, options, t))
        .collect::<Result<_>>()?;

    let rejections: Vec<Rejection> = trials
        .iter()
        .filter(|t| !t.accepted)
        .map(|t| Rejection {
            trial: t.index,
            reason: match t.min_symplectic_eigenvalue {
                Some(nu) => format!(
                    "min symplectic eigenvalue {nu:.6} < 1 - {:e}",
                    options.rejection_tol
                ),
                None => "reconstructed matrix not positive definite".into(),
            },
        })
        .collect();

    let reports: Vec<&SteeringReport> = trials.iter().filter_map(|t| t.steering.as_ref()).collect();
    if reports.len() < 2 {
        let diag: Vec<String> = rejections
            .iter()
            .map(|r| format!("trial {}: {}", r.trial, r.reason))
            .collect();
        return Err(Error::Tomography(format!(
            "{} of {} trials accepted; {}",
            reports.len(),
            options.n_trials,
            diag.join("; ")
        )));
    }
    let aggregates = Direction::ALL
        .iter()
        .map(|&d| {
            let values: Vec<f64> = reports.iter().map(|r| r.get(d)).collect();
            mean_and_std(&values)
        })
        .collect();
    Ok(TrialStatistics {
        options: *options,
        trials,
        rejections,
        aggregates,
    })
}

/// Mean and unbiased sample standard deviation; needs at least two values.
pub fn mean_and_std(values: &[f64]) -> Aggregate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Aggregate {
        mean,
        std: var.sqrt(),
    }
}
