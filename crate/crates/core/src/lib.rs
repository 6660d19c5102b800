//! Gaussian EPR steering in the continuous-variable tripartite GHZ state.
//!
//! The crate builds the GHZ covariance matrix from three squeezed vacua and
//! a two-beam-splitter network, sends mode A through a pure-loss channel,
//! and quantifies Gaussian steering for all twelve directed bipartitions
//! together with the CKW-type monogamy residuals. The [`tomography`] module
//! simulates covariance reconstruction from eighteen homodyne variances.
//!
//! All covariance matrices are in shot-noise units (vacuum variance 1) with
//! interleaved quadrature order `(x1, p1, x2, p2, ...)`.

pub mod error;
pub mod network;
pub mod steering;
pub mod symplectic;
pub mod tomography;

pub use error::{Error, Result};
pub use network::{build_ghz, lossy_channel, prepare_state, GhzConfig, QuadCombo, Quadrature};
pub use steering::{
    find_threshold, gaussian_steering, monogamy_residuals, steering_report, sweep_eta, Direction,
    MonogamyReport, SteeringReport, SweepRow,
};
pub use symplectic::{
    is_physical, purity, reduce, schur_complement, symplectic_eigenvalues, symplectic_form,
    CovarianceMatrix, Partition, SymplecticMatrix,
};
pub use tomography::{
    covariance_from_measurements, measure_set, population_measurements, reconstruct_trials,
    sample_quadratures, MeasurementSet, SampleTable, TrialStatistics,
};
