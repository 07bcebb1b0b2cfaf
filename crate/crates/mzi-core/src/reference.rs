//! Independent oracles: closed-form outcome probabilities and metrics
//! transcribed directly from their printed expressions, plus a dense
//! numeric-phase brute-force evolver.
//!
//! Nothing here touches the phase-polynomial algebra the engine uses, so
//! agreement between the two paths is a meaningful check. These functions
//! exist to validate `engine` and `metrics`; they are not optimized.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::engine::{Occupation, Outcome, PureState};
use crate::interferometer::{ScatteringMatrix, MODES};
use crate::{Error, Result};

/// Photon ceiling for the dense oracle.
pub const ORACLE_MAX_PHOTONS: u32 = 4;

/// Closed-form probability cases with printed expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefCase {
    /// One-photon Fock input |1,0⟩, lossy interferometer.
    Fock1(Outcome),
    /// Two-photon Fock input |2,0⟩, lossy interferometer.
    Fock2(Outcome),
    /// Two-photon N00N input, lossy interferometer (φ-independent).
    Noon2(Outcome),
    /// One-photon lossless transfer with binary-flip detection error `p_x`.
    Detector1 { outcome: Outcome, p_x: f64 },
}

/// Evaluates one printed probability formula.
///
/// Errors on outcomes the printed equations do not cover.
pub fn ref_probability(case: RefCase, r_x: f64, r_y: f64, phi: f64) -> Result<f64> {
    let rx2 = r_x * r_x;
    let ry2 = r_y * r_y;
    let cross = ((1.0 - rx2) * (1.0 - ry2)).sqrt();
    match case {
        RefCase::Fock1(outcome) => {
            let base = 2.0 - rx2 - ry2;
            match (outcome.n, outcome.m) {
                (1, 0) => Ok((base - 2.0 * cross * phi.cos()) / 4.0),
                (0, 1) => Ok((base + 2.0 * cross * phi.cos()) / 4.0),
                (0, 0) => Ok((rx2 + ry2) / 2.0),
                _ => Err(unknown(case)),
            }
        }
        RefCase::Fock2(outcome) => {
            let c = phi.cos();
            let c2 = (2.0 * phi).cos();
            let sym = 6.0 - 6.0 * rx2 - 6.0 * ry2
                + 2.0 * (rx2 - 1.0) * (ry2 - 1.0) * c2
                + 4.0 * rx2 * ry2
                + rx2 * rx2
                + ry2 * ry2;
            let osc = 4.0 * cross * (rx2 + ry2 - 2.0) * c;
            match (outcome.n, outcome.m) {
                (2, 0) => Ok((sym + osc) / 16.0),
                (0, 2) => Ok((sym - osc) / 16.0),
                (1, 1) => Ok((2.0 - 2.0 * rx2 - 2.0 * ry2 + rx2 * rx2 + ry2 * ry2
                    - 2.0 * (1.0 - rx2) * (1.0 - ry2) * c2)
                    / 8.0),
                (1, 0) => {
                    Ok((rx2 + ry2) * (2.0 - rx2 - ry2 - 2.0 * cross * c) / 4.0)
                }
                (0, 1) => {
                    Ok((rx2 + ry2) * (2.0 - rx2 - ry2 + 2.0 * cross * c) / 4.0)
                }
                (0, 0) => Ok((rx2 + ry2) * (rx2 + ry2) / 4.0),
                _ => Err(unknown(case)),
            }
        }
        RefCase::Noon2(outcome) => match (outcome.n, outcome.m) {
            (2, 0) | (0, 2) => Ok(0.5 * (1.0 - rx2 - ry2 + rx2 * ry2)),
            (1, 1) => Ok(0.0),
            (1, 0) | (0, 1) => Ok(0.5 * (rx2 + ry2 - 2.0 * rx2 * ry2)),
            (0, 0) => Ok(rx2 * ry2),
            _ => Err(unknown(case)),
        },
        RefCase::Detector1 { outcome, p_x } => {
            let p_d = 1.0 - p_x;
            let s2 = phi.sin().powi(2);
            let c2 = phi.cos().powi(2);
            match (outcome.n, outcome.m) {
                (1, 0) => Ok(p_d * s2 + p_x * c2),
                (0, 1) => Ok(p_x * s2 + p_d * c2),
                _ => Err(unknown(case)),
            }
        }
    }
}

fn unknown(case: RefCase) -> Error {
    Error::Config(format!("no printed closed form for {case:?}"))
}

/// The printed one-photon classical Fisher information,
///
/// `F₁ = 2(1−r_x²)(1−r_y²)(2−r_x²−r_y²) sin²φ /
///      [(2−r_x²−r_y²)² − 4(1−r_x²)(1−r_y²) cos²φ]`,
///
/// with the removable φ = 0, ±π limits taken as zero. At `r_x = r_y` this
/// reduces to the φ-independent `1 − r_x²`.
pub fn ref_fisher_1photon(r_x: f64, r_y: f64, phi: f64) -> f64 {
    let a = 2.0 - r_x * r_x - r_y * r_y;
    let b = (1.0 - r_x * r_x) * (1.0 - r_y * r_y);
    if a == 0.0 {
        // full loss in both arms: no photon ever reaches a detector
        return 0.0;
    }
    let den = a * a - 4.0 * b * phi.cos().powi(2);
    if den <= 1e-300 {
        // r_x = r_y and cos²φ = 1: the limit value is 1 − r_x²
        return 1.0 - r_x * r_x;
    }
    2.0 * b * a * phi.sin().powi(2) / den
}

/// The printed binary-flip posterior `p(φ|ξ)` for the one-photon lossless
/// transfer, uniform prior.
pub fn ref_detector_posterior(outcome: Outcome, p_x: f64, phi: f64) -> Result<f64> {
    let p = ref_probability(RefCase::Detector1 { outcome, p_x }, 0.0, 0.0, phi)?;
    Ok(p / std::f64::consts::PI)
}

/// The printed one-photon fidelity at equal loss,
/// `H = (1/ln2 − 1)(1 − r_x²)` bits.
pub fn ref_fidelity_1photon_equal_loss(r: f64) -> f64 {
    (1.0 / std::f64::consts::LN_2 - 1.0) * (1.0 - r * r)
}

/// The printed two-photon fidelity at equal loss,
/// `H = (1 − r²)[8 − 4 ln2 − 3 ln3 + 2 r² arctanh(11/43)] / (4 ln2)` bits.
pub fn ref_fidelity_2photon_equal_loss(r: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let ln3 = 3.0_f64.ln();
    let r2 = r * r;
    (1.0 - r2) * (8.0 - 4.0 * ln2 - 3.0 * ln3 + 2.0 * r2 * (11.0 / 43.0_f64).atanh())
        / (4.0 * ln2)
}

/// Dense brute-force evolution at a fixed numeric phase.
///
/// Expands every input creation operator photon by photon over the four
/// output modes using the scattering matrix evaluated at `phi`, multiplies
/// the resulting operator polynomials term by term, and normalizes with
/// exact factorials. Returns the amplitude on each output occupation.
pub fn brute_force_evolve(
    state: &PureState,
    s: &ScatteringMatrix,
    phi: f64,
) -> Result<BTreeMap<Occupation, Complex64>> {
    let total = state.max_photons();
    if total > ORACLE_MAX_PHOTONS {
        return Err(Error::OracleLimit {
            total,
            max: ORACLE_MAX_PHOTONS,
        });
    }
    let matrix = s.eval(phi);
    let mut acc: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (amp, occ) in state.terms() {
        // build the operator polynomial one photon at a time
        let mut poly: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        poly.insert(Occupation::vacuum(), Complex64::new(1.0, 0.0));
        for (mode, &count) in occ.0.iter().enumerate() {
            for _ in 0..count {
                let mut next: BTreeMap<Occupation, Complex64> = BTreeMap::new();
                for (e, c) in &poly {
                    for (row, coeff) in matrix.iter().enumerate() {
                        let sij = coeff[mode];
                        if sij.norm_sqr() == 0.0 {
                            continue;
                        }
                        let mut arr = e.0;
                        arr[row] += 1;
                        *next
                            .entry(Occupation(arr))
                            .or_insert(Complex64::new(0.0, 0.0)) += c * sij;
                    }
                }
                poly = next;
            }
        }
        let input_norm = fact_norm(&occ.0).sqrt();
        for (e, c) in poly {
            let value = amp * c * fact_norm(&e.0).sqrt() / input_norm;
            *acc.entry(e).or_insert(Complex64::new(0.0, 0.0)) += value;
        }
    }
    Ok(acc)
}

fn fact_norm(counts: &[u32; MODES]) -> f64 {
    counts
        .iter()
        .map(|&k| (1..=k as u64).product::<u64>() as f64)
        .product()
}

/// Detected-pair marginals of the brute-force amplitudes.
pub fn brute_force_marginals(
    state: &PureState,
    s: &ScatteringMatrix,
    phi: f64,
) -> Result<BTreeMap<Outcome, f64>> {
    let mut out: BTreeMap<Outcome, f64> = BTreeMap::new();
    for (occ, amp) in brute_force_evolve(state, s, phi)? {
        *out.entry(occ.detected()).or_insert(0.0) += amp.norm_sqr();
    }
    Ok(out)
}
