//! Photon-counting phase estimation through a lossy Mach-Zehnder interferometer.
//!
//! The interferometer is modeled as a 4-mode unitary scattering matrix whose
//! entries are polynomials in z = e^{iφ}, so every outcome probability is an
//! exact trigonometric polynomial in the arm phase φ. On top of the exact
//! distributions the crate computes:
//!
//! - classical Fisher information and the Cramer-Rao bound, using analytic
//!   spectrum derivatives ([`metrics::fisher_information`]);
//! - fidelity, the Shannon mutual information in bits between phase and
//!   measurement outcomes under a prior ([`metrics::fidelity`]);
//! - Bayesian phase posteriors for individual outcomes ([`metrics::posterior`]);
//! - the full non-ideal measurement chain: non-deterministic state
//!   preparation, non-unitary propagation, and imperfect detection
//!   ([`pipeline`]).
//!
//! Input states are few-photon Fock states `|N0⟩`, N00N states
//! `(|N0⟩+|0N⟩)/√2`, and diagonal mixtures of those. Losses in the two arms
//! are parameterized by beam-splitter reflection amplitudes `r_x` and `r_y`.
//!
//! The `mzi` binary exposes the same functionality as a CLI for parameter
//! sweeps and plot-data generation; see the crate README.

pub mod cli;
pub mod engine;
pub mod interferometer;
pub mod metrics;
pub mod pipeline;
pub mod poly;
pub mod reference;
pub mod statespec;

pub use engine::{Occupation, Outcome, OutcomeDistribution, PureState};
pub use interferometer::{LossParameters, ScatteringMatrix};
pub use metrics::{FidelityReport, FisherReport, PhasePrior};
pub use pipeline::{DetectionModel, MeasurementModel, PreparationModel, Transfer};
pub use poly::{PhasePolynomial, TrigSpectrum};

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("loss amplitude {name} = {value} outside [0, 1]")]
    LossOutOfRange { name: &'static str, value: f64 },

    #[error("{name} = {value} must be non-negative and finite")]
    InvalidLength { name: &'static str, value: f64 },

    #[error("state holds {total} photons, engine ceiling is {max}")]
    PhotonLimit { total: u32, max: u32 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("mixture weights sum to {sum}, expected 1")]
    MixtureNotNormalized { sum: f64 },

    #[error("negative mixture weight {weight}")]
    NegativeWeight { weight: f64 },

    #[error("detection probability {value} outside [0, 1]")]
    DetectionOutOfRange { value: f64 },

    #[error("detection kernel row for {outcome} sums to {sum}, expected 1")]
    KernelRowNotNormalized { outcome: Outcome, sum: f64 },

    #[error("detection kernel has no row for reachable outcome {0}")]
    MissingKernelRow(Outcome),

    #[error("transfer convention requires {required}, got {got}")]
    IncompatibleTransfer { required: &'static str, got: String },

    #[error("distribution sums to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("outcome {0} has zero marginal probability under the prior")]
    UnreachableOutcome(Outcome),

    #[error("posterior grid size {0} below minimum of 16")]
    GridTooSmall(usize),

    #[error("quadrature did not converge within {nodes} nodes (last estimate {last})")]
    QuadratureNoConvergence { last: f64, nodes: u64 },

    #[error("fidelity tolerance {0} must be positive")]
    InvalidTolerance(f64),

    #[error("series expansion only valid for r_x, r_y <= {max}, got {value}")]
    SeriesOutOfRange { value: f64, max: f64 },

    #[error("state spec error at byte {position}: {message}")]
    StateSpec { position: usize, message: String },

    #[error("brute-force oracle limited to {max} photons, state holds {total}")]
    OracleLimit { total: u32, max: u32 },

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
