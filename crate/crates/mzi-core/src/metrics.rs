//! Information metrics over outcome distributions: classical Fisher
//! information with the Cramer-Rao bound, fidelity (Shannon mutual
//! information between phase and outcomes), and Bayesian phase posteriors.

use std::collections::BTreeMap;

use crate::engine::Outcome;
use crate::poly::TrigSpectrum;
use crate::{Error, Result};

use std::f64::consts::PI;

/// Probability floor below which an outcome is treated as unoccupied when
/// evaluating the Fisher sum.
const FISHER_PROB_FLOOR: f64 = 1e-12;

/// Derivative magnitude above which a vanishing probability is a genuine
/// divergence rather than a removable 0/0 limit.
const FISHER_DERIV_FLOOR: f64 = 1e-9;

/// Tolerated deviation of the distribution sum from one at the query phase.
const NORMALIZATION_TOL: f64 = 1e-8;

/// Floor inside logarithms; keeps 0·log 0 = 0 without producing −inf.
const LOG_FLOOR: f64 = 1e-300;

/// Initial and maximal node counts for the doubling quadrature.
const QUAD_NODES_MIN: u64 = 64;
const QUAD_NODES_MAX: u64 = 1 << 20;

/// Prior probability density for the phase on [−π, π].
#[derive(Clone, Debug, PartialEq)]
pub enum PhasePrior {
    /// No prior information: p(φ) = 1/(2π).
    Uniform,
    /// Piecewise-linear density through (φ, weight) points with periodic
    /// wraparound, normalized to integrate to one.
    Tabulated(Vec<(f64, f64)>),
}

impl PhasePrior {
    pub fn uniform() -> Self {
        Self::Uniform
    }

    /// Builds a tabulated prior from weight samples on [−π, π].
    ///
    /// Points are sorted by phase and the density is renormalized so the
    /// periodic trapezoid integral over the circle is one.
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPrior(
                "tabulated prior needs at least two points".into(),
            ));
        }
        let mut points = points;
        for &(phi, w) in &points {
            if !phi.is_finite() || !(-PI..=PI).contains(&phi) {
                return Err(Error::InvalidPrior(format!(
                    "phase {phi} outside [-pi, pi]"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidPrior(format!("negative weight {w}")));
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        if points.len() < 2 {
            return Err(Error::InvalidPrior("all points share one phase".into()));
        }
        let integral = periodic_trapezoid_integral(&points);
        if integral <= 0.0 {
            return Err(Error::InvalidPrior("prior integrates to zero".into()));
        }
        for point in &mut points {
            point.1 /= integral;
        }
        Ok(Self::Tabulated(points))
    }

    /// Density at a phase, with periodic wraparound onto [−π, π).
    pub fn density(&self, phi: f64) -> f64 {
        match self {
            Self::Uniform => 1.0 / (2.0 * PI),
            Self::Tabulated(points) => {
                let x = wrap_phase(phi);
                // segment [points[i], points[i+1]) or the wraparound segment
                let idx = points.partition_point(|p| p.0 <= x);
                let (lo, hi, span) = if idx == 0 || idx == points.len() {
                    let last = points[points.len() - 1];
                    let first = points[0];
                    let span = first.0 + 2.0 * PI - last.0;
                    let x_rel = if idx == 0 {
                        x + 2.0 * PI - last.0
                    } else {
                        x - last.0
                    };
                    return interpolate(last.1, first.1, x_rel / span);
                } else {
                    let lo = points[idx - 1];
                    let hi = points[idx];
                    (lo, hi, points[idx].0 - points[idx - 1].0)
                };
                interpolate(lo.1, hi.1, (x - lo.0) / span)
            }
        }
    }
}

fn interpolate(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

fn wrap_phase(phi: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut x = (phi + PI).rem_euclid(two_pi) - PI;
    if x >= PI {
        x -= two_pi;
    }
    x
}

/// Integral of unsorted (φ, weight) samples around the circle; used to
/// check prior files for normalization before loading them.
pub(crate) fn periodic_trapezoid_integral_of(points: &[(f64, f64)]) -> f64 {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    if sorted.len() < 2 {
        return 0.0;
    }
    periodic_trapezoid_integral(&sorted)
}

/// Trapezoid integral of piecewise-linear samples around the circle,
/// including the wraparound segment.
fn periodic_trapezoid_integral(points: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for w in points.windows(2) {
        total += (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0;
    }
    let last = points[points.len() - 1];
    let first = points[0];
    total += (first.0 + 2.0 * PI - last.0) * (last.1 + first.1) / 2.0;
    total
}

/// Classical Fisher information at one phase, with its Cramer-Rao bound.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherReport {
    /// Query phase in radians.
    pub phi: f64,
    /// `F = Σ_ξ (∂P/∂φ)² / P`, per interferometer use.
    pub fisher: f64,
    /// `1/F`, or +∞ when the Fisher information vanishes.
    pub cramer_rao_bound: f64,
    /// Outcomes whose probability vanished while its derivative did not;
    /// non-empty only when `fisher` is +∞.
    pub divergent_outcomes: Vec<Outcome>,
}

/// Computes the classical Fisher information from exact spectrum
/// derivatives.
///
/// Outcomes with both probability and derivative below floor contribute
/// zero (removable limit). A vanishing probability with a non-vanishing
/// derivative is reported as +∞ with the offending outcomes listed.
pub fn fisher_information(
    probs: &BTreeMap<Outcome, TrigSpectrum>,
    phi: f64,
) -> Result<FisherReport> {
    let total: f64 = probs.values().map(|s| s.eval(phi)).sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum: total });
    }
    let mut fisher = 0.0;
    let mut divergent = Vec::new();
    for (outcome, spectrum) in probs {
        let p = spectrum.eval(phi);
        let dp = spectrum.derivative().eval(phi);
        if p < FISHER_PROB_FLOOR {
            if dp.abs() >= FISHER_DERIV_FLOOR {
                divergent.push(*outcome);
            }
            continue;
        }
        fisher += dp * dp / p;
    }
    if !divergent.is_empty() {
        fisher = f64::INFINITY;
    }
    let cramer_rao_bound = if fisher > 0.0 { 1.0 / fisher } else { f64::INFINITY };
    Ok(FisherReport {
        phi,
        fisher,
        cramer_rao_bound,
        divergent_outcomes: divergent,
    })
}

/// Fidelity in bits together with the node count the quadrature settled at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityReport {
    pub bits: f64,
    pub nodes: u64,
}

/// Fidelity: the Shannon mutual information between phase and outcome,
///
/// `H(M) = Σ_ξ ∫ dφ P(ξ|φ) p(φ) log₂[P(ξ|φ) / ∫ P(ξ|φ′) p(φ′) dφ′]`,
///
/// in bits per interferometer use. Integrals use the periodic trapezoid
/// rule with node doubling from 64 until successive estimates differ by
/// less than `tol`; outcome marginals are computed on the same nodes.
pub fn fidelity(
    probs: &BTreeMap<Outcome, TrigSpectrum>,
    prior: &PhasePrior,
    tol: f64,
) -> Result<FidelityReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let mut prev: Option<f64> = None;
    let mut nodes = QUAD_NODES_MIN;
    while nodes <= QUAD_NODES_MAX {
        let estimate = mutual_information_on_grid(probs, prior, nodes);
        if let Some(last) = prev {
            if (estimate - last).abs() < tol {
                return Ok(FidelityReport {
                    bits: estimate,
                    nodes,
                });
            }
        }
        prev = Some(estimate);
        nodes *= 2;
    }
    Err(Error::QuadratureNoConvergence {
        last: prev.unwrap_or(f64::NAN),
        nodes: QUAD_NODES_MAX,
    })
}

fn quad_nodes(count: u64) -> impl Iterator<Item = f64> {
    let step = 2.0 * PI / count as f64;
    (0..count).map(move |j| -PI + step * j as f64)
}

fn mutual_information_on_grid(
    probs: &BTreeMap<Outcome, TrigSpectrum>,
    prior: &PhasePrior,
    count: u64,
) -> f64 {
    let step = 2.0 * PI / count as f64;
    let weights: Vec<f64> = quad_nodes(count).map(|phi| prior.density(phi) * step).collect();
    let mut total = 0.0;
    for spectrum in probs.values() {
        let values: Vec<f64> = quad_nodes(count).map(|phi| spectrum.eval(phi)).collect();
        let marginal: f64 = values
            .iter()
            .zip(&weights)
            .map(|(p, w)| p.max(0.0) * w)
            .sum();
        if marginal <= 0.0 {
            continue;
        }
        for (p, w) in values.iter().zip(&weights) {
            if *p > 0.0 {
                total += w * p * (p.max(LOG_FLOOR) / marginal.max(LOG_FLOOR)).log2();
            }
        }
    }
    total
}

/// A phase posterior tabulated on a uniform grid over [−π, π).
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    pub phis: Vec<f64>,
    pub density: Vec<f64>,
}

impl Posterior {
    /// Periodic trapezoid integral of the tabulated density; one for a
    /// well-formed posterior.
    pub fn integral(&self) -> f64 {
        let step = 2.0 * PI / self.density.len() as f64;
        self.density.iter().sum::<f64>() * step
    }
}

/// Bayesian posterior `p(φ|ξ) = P(ξ|φ) p(φ) / ∫ P(ξ|φ′) p(φ′) dφ′` for one
/// outcome, tabulated on `grid_size` uniform phases.
///
/// Errors on grids below 16 points and on outcomes with zero marginal
/// probability under the prior.
pub fn posterior(
    probs: &BTreeMap<Outcome, TrigSpectrum>,
    outcome: Outcome,
    prior: &PhasePrior,
    grid_size: usize,
) -> Result<Posterior> {
    if grid_size < 16 {
        return Err(Error::GridTooSmall(grid_size));
    }
    let spectrum = probs
        .get(&outcome)
        .ok_or(Error::UnreachableOutcome(outcome))?;
    let step = 2.0 * PI / grid_size as f64;
    let phis: Vec<f64> = (0..grid_size).map(|j| -PI + step * j as f64).collect();
    let joint: Vec<f64> = phis
        .iter()
        .map(|&phi| spectrum.eval(phi).max(0.0) * prior.density(phi))
        .collect();
    let marginal: f64 = joint.iter().sum::<f64>() * step;
    if marginal <= LOG_FLOOR {
        return Err(Error::UnreachableOutcome(outcome));
    }
    let density = joint.iter().map(|v| v / marginal).collect();
    Ok(Posterior { phis, density })
}

/// Input selector for the truncated small-loss fidelity expansions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesInput {
    /// One-photon Fock state |1,0⟩.
    Fock1,
    /// Two-photon Fock state |2,0⟩.
    Fock2,
}

/// Loss magnitude up to which the truncated series is accepted.
pub const SERIES_MAX_LOSS: f64 = 0.3;

/// The O(r⁴)-truncated small-loss fidelity expansions, used as cross-checks
/// against the quadrature fidelity.
///
/// For |1,0⟩: `(1/ln2 − 1)[1 − (r_x² + r_y²)/2]`. For |2,0⟩ the expansion
/// around the lossless value `(8 − 4 ln2 − 3 ln3)/(4 ln2)`.
pub fn small_loss_fidelity_series(input: SeriesInput, r_x: f64, r_y: f64) -> Result<f64> {
    for r in [r_x, r_y] {
        if !r.is_finite() || r < 0.0 || r > SERIES_MAX_LOSS {
            return Err(Error::SeriesOutOfRange {
                value: r,
                max: SERIES_MAX_LOSS,
            });
        }
    }
    let ln2 = std::f64::consts::LN_2;
    let ln3 = 3.0_f64.ln();
    let rx2 = r_x * r_x;
    let ry2 = r_y * r_y;
    Ok(match input {
        SeriesInput::Fock1 => (1.0 / ln2 - 1.0) * (1.0 - 0.5 * (rx2 + ry2)),
        SeriesInput::Fock2 => {
            (8.0 - 4.0 * ln2 - 3.0 * ln3) / (4.0 * ln2)
                + (rx2 + ry2) * (3.0 * ln3 / (4.0 * ln2) - 1.0 / ln2)
                + rx2 * ry2 * (1.0 + ln2 - ln3) / (2.0 * ln2)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{outcome_distribution, PureState};
    use crate::interferometer::{build_lossy_mz, LossParameters};
    use approx::assert_abs_diff_eq;

    fn dist(state: &PureState, rx: f64, ry: f64) -> BTreeMap<Outcome, TrigSpectrum> {
        let s = build_lossy_mz(&LossParameters::new(rx, ry).unwrap());
        outcome_distribution(state, &s).into_probs()
    }

    #[test]
    fn uniform_prior_density() {
        let p = PhasePrior::uniform();
        assert_abs_diff_eq!(p.density(1.3), 1.0 / (2.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn tabulated_prior_normalizes_and_wraps() {
        let prior =
            PhasePrior::tabulated(vec![(-PI, 1.0), (0.0, 3.0), (PI / 2.0, 2.0)]).unwrap();
        // integral over the circle is one after renormalization
        let n = 200_000;
        let step = 2.0 * PI / n as f64;
        let integral: f64 = (0..n)
            .map(|j| prior.density(-PI + step * j as f64) * step)
            .sum();
        assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-6);
        // periodic: density just above π equals density just above −π
        assert_abs_diff_eq!(
            prior.density(PI + 0.01),
            prior.density(-PI + 0.01),
            epsilon = 1e-12
        );
    }

    #[test]
    fn prior_rejects_bad_input() {
        assert!(PhasePrior::tabulated(vec![(0.0, 1.0)]).is_err());
        assert!(PhasePrior::tabulated(vec![(0.0, 1.0), (4.0, 1.0)]).is_err());
        assert!(PhasePrior::tabulated(vec![(0.0, -1.0), (1.0, 1.0)]).is_err());
        assert!(PhasePrior::tabulated(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn fisher_lossless_one_photon_is_unity() {
        let probs = dist(&PureState::fock(1).unwrap(), 0.0, 0.0);
        for k in 1..16 {
            let phi = -3.0 + 0.4 * k as f64;
            let report = fisher_information(&probs, phi).unwrap();
            assert_abs_diff_eq!(report.fisher, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(report.cramer_rao_bound, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn fisher_equal_loss_is_phase_flat() {
        let probs = dist(&PureState::fock(1).unwrap(), 0.5, 0.5);
        for k in 0..16 {
            let phi = -3.0 + 0.4 * k as f64;
            let report = fisher_information(&probs, phi).unwrap();
            assert_abs_diff_eq!(report.fisher, 0.75, epsilon = 1e-12);
        }
    }

    #[test]
    fn fisher_vanishes_at_zero_phase_under_unequal_loss() {
        let probs = dist(&PureState::fock(1).unwrap(), 0.3, 0.7);
        let report = fisher_information(&probs, 0.0).unwrap();
        assert!(report.fisher.abs() < 1e-12);
        assert!(report.cramer_rao_bound.is_infinite());
        assert!(report.divergent_outcomes.is_empty());
    }

    #[test]
    fn fisher_rejects_unnormalized_input() {
        let mut probs = dist(&PureState::fock(1).unwrap(), 0.0, 0.0);
        probs.remove(&Outcome::new(0, 1));
        assert!(matches!(
            fisher_information(&probs, 0.7),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn fidelity_lossless_one_photon() {
        let probs = dist(&PureState::fock(1).unwrap(), 0.0, 0.0);
        let report = fidelity(&probs, &PhasePrior::uniform(), 1e-8).unwrap();
        let exact = 1.0 / std::f64::consts::LN_2 - 1.0;
        assert_abs_diff_eq!(report.bits, exact, epsilon = 1e-6);
        assert!(report.nodes <= 1 << 14, "nodes = {}", report.nodes);
    }

    #[test]
    fn fidelity_equal_loss_half() {
        let probs = dist(&PureState::fock(1).unwrap(), 0.5, 0.5);
        let report = fidelity(&probs, &PhasePrior::uniform(), 1e-8).unwrap();
        let exact = (1.0 / std::f64::consts::LN_2 - 1.0) * 0.75;
        assert_abs_diff_eq!(report.bits, exact, epsilon = 1e-6);
    }

    #[test]
    fn fidelity_of_noon2_is_zero() {
        for (rx, ry) in [(0.0, 0.0), (0.3, 0.6), (0.9, 0.2)] {
            let probs = dist(&PureState::noon(2).unwrap(), rx, ry);
            let report = fidelity(&probs, &PhasePrior::uniform(), 1e-8).unwrap();
            assert!(report.bits.abs() < 1e-9, "H = {} at ({rx},{ry})", report.bits);
        }
    }

    #[test]
    fn fidelity_shift_invariance_under_uniform_prior() {
        // evaluating all spectra at φ + c only reindexes the integrand;
        // a N00N input is the φ-shifted Fock input, so compare those
        let fock = dist(&PureState::fock(1).unwrap(), 0.25, 0.65);
        let noon = dist(&PureState::noon(1).unwrap(), 0.25, 0.65);
        let hf = fidelity(&fock, &PhasePrior::uniform(), 1e-9).unwrap();
        let hn = fidelity(&noon, &PhasePrior::uniform(), 1e-9).unwrap();
        assert_abs_diff_eq!(hf.bits, hn.bits, epsilon = 1e-8);
    }

    #[test]
    fn fidelity_rejects_bad_tolerance() {
        let probs = dist(&PureState::fock(1).unwrap(), 0.0, 0.0);
        assert!(fidelity(&probs, &PhasePrior::uniform(), 0.0).is_err());
        assert!(fidelity(&probs, &PhasePrior::uniform(), -1.0).is_err());
    }

    #[test]
    fn posterior_of_inconclusive_outcome_is_flat() {
        let probs = dist(&PureState::fock(1).unwrap(), 0.4, 0.7);
        let post = posterior(&probs, Outcome::INCONCLUSIVE, &PhasePrior::uniform(), 256).unwrap();
        for d in &post.density {
            assert_abs_diff_eq!(*d, 1.0 / (2.0 * PI), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(post.integral(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn posterior_equal_loss_is_loss_independent() {
        for r in [0.0, 0.3, 0.8] {
            let probs = dist(&PureState::fock(1).unwrap(), r, r);
            let post =
                posterior(&probs, Outcome::new(1, 0), &PhasePrior::uniform(), 128).unwrap();
            for (phi, d) in post.phis.iter().zip(&post.density) {
                let expect = (1.0 - phi.cos()) / (2.0 * PI);
                assert_abs_diff_eq!(*d, expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn posterior_coincidence_outcome_two_photons() {
        let probs = dist(&PureState::fock(2).unwrap(), 0.6, 0.6);
        let post = posterior(&probs, Outcome::new(1, 1), &PhasePrior::uniform(), 256).unwrap();
        for (phi, d) in post.phis.iter().zip(&post.density) {
            let expect = phi.sin().powi(2) / PI;
            assert_abs_diff_eq!(*d, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn posterior_unreachable_outcome() {
        let probs = dist(&PureState::noon(2).unwrap(), 0.3, 0.4);
        assert!(matches!(
            posterior(&probs, Outcome::new(1, 1), &PhasePrior::uniform(), 64),
            Err(Error::UnreachableOutcome(_))
        ));
        let lossless = dist(&PureState::fock(1).unwrap(), 0.0, 0.0);
        assert!(matches!(
            posterior(&lossless, Outcome::new(5, 5), &PhasePrior::uniform(), 64),
            Err(Error::UnreachableOutcome(_))
        ));
    }

    #[test]
    fn posterior_grid_floor() {
        let probs = dist(&PureState::fock(1).unwrap(), 0.0, 0.0);
        assert!(matches!(
            posterior(&probs, Outcome::new(1, 0), &PhasePrior::uniform(), 8),
            Err(Error::GridTooSmall(8))
        ));
    }

    #[test]
    fn series_guard_and_lossless_values() {
        assert!(small_loss_fidelity_series(SeriesInput::Fock1, 0.4, 0.0).is_err());
        let ln2 = std::f64::consts::LN_2;
        let h1 = small_loss_fidelity_series(SeriesInput::Fock1, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(h1, 1.0 / ln2 - 1.0, epsilon = 1e-15);
        let h2 = small_loss_fidelity_series(SeriesInput::Fock2, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(
            h2,
            (8.0 - 4.0 * ln2 - 3.0 * 3.0_f64.ln()) / (4.0 * ln2),
            epsilon = 1e-15
        );
        // ≈ 0.696668 bits at zero loss
        assert_abs_diff_eq!(h2, 0.696668, epsilon = 1e-6);
    }

    #[test]
    fn series_tracks_quadrature_at_small_loss() {
        let probs = dist(&PureState::fock(1).unwrap(), 0.1, 0.1);
        let quad = fidelity(&probs, &PhasePrior::uniform(), 1e-9).unwrap();
        let series = small_loss_fidelity_series(SeriesInput::Fock1, 0.1, 0.1).unwrap();
        assert_abs_diff_eq!(quad.bits, series, epsilon = 5e-4);
    }
}
