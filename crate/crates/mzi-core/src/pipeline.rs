//! The three-stage non-ideal measurement chain: state preparation P_S,
//! interferometer transfer P_I, and detection P_D.
//!
//! Final outcome probabilities compose as
//! `P(ξ|φ) = Σ_j P_D(ξ|j) · Σ_k P_I(j|k, φ) · P_S(k)`.
//! With a φ-independent detection kernel the result stays an exact trig
//! spectrum per outcome label; φ-dependent kernels degrade to gridded
//! evaluation via [`gridded_distribution`].

use std::collections::BTreeMap;

use crate::engine::{mixed_outcome_distribution, Outcome, PureState};
use crate::interferometer::ScatteringMatrix;
use crate::poly::TrigSpectrum;
use crate::{Error, Result};

/// Non-deterministic state preparation: a diagonal mixture of pure states
/// with preparation probabilities summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparationModel {
    components: Vec<(f64, PureState)>,
}

impl PreparationModel {
    /// Deterministic preparation of a single pure state.
    pub fn deterministic(state: PureState) -> Self {
        Self {
            components: vec![(1.0, state)],
        }
    }

    /// A mixture with explicit weights; weights must be non-negative and
    /// sum to one within 1e−12.
    pub fn mixture(components: Vec<(f64, PureState)>) -> Result<Self> {
        let mut sum = 0.0;
        for (weight, _) in &components {
            if *weight < 0.0 || !weight.is_finite() {
                return Err(Error::NegativeWeight { weight: *weight });
            }
            sum += weight;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::MixtureNotNormalized { sum });
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, PureState)] {
        &self.components
    }

    /// True when the preparation is exactly the deterministic state `state`.
    fn is_deterministic(&self, state: &PureState) -> bool {
        self.components.len() == 1
            && self.components[0].0 == 1.0
            && &self.components[0].1 == state
    }
}

/// Interferometer transfer stage.
#[derive(Clone, Debug)]
pub enum Transfer {
    /// Exact engine evolution through a scattering matrix.
    Scattering(ScatteringMatrix),
    /// The fixed one-photon lossless transfer table with
    /// `P(1,0|φ) = sin²φ` and `P(0,1|φ) = cos²φ`, defined only for the
    /// deterministic |1,0⟩ preparation. This is a distinct phase convention
    /// from the 2×2 matrix (which gives cos²(φ/2) / sin²(φ/2)); both are
    /// kept so either printed form can be reproduced.
    OnePhotonSinSq,
}

/// A φ-independent detector confusion kernel: for each true photon pair,
/// the probabilities of each reported label. Rows sum to one.
///
/// The reported label (0,0) is the inconclusive outcome (no detector fired).
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionKernel {
    rows: BTreeMap<Outcome, Vec<(Outcome, f64)>>,
}

impl DetectionKernel {
    /// Validates entries in [0, 1] and row sums of one within 1e−12.
    pub fn new(rows: BTreeMap<Outcome, Vec<(Outcome, f64)>>) -> Result<Self> {
        for (true_outcome, row) in &rows {
            let mut sum = 0.0;
            for (_, p) in row {
                if !(0.0..=1.0).contains(p) || !p.is_finite() {
                    return Err(Error::DetectionOutOfRange { value: *p });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::KernelRowNotNormalized {
                    outcome: *true_outcome,
                    sum,
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &BTreeMap<Outcome, Vec<(Outcome, f64)>> {
        &self.rows
    }
}

/// Detection stage: ideal (reported = true) or an explicit confusion kernel.
#[derive(Clone, Debug, PartialEq)]
pub enum DetectionModel {
    Ideal,
    Kernel(DetectionKernel),
}

/// Binary-flip detection over the one-photon outcomes {(1,0), (0,1)}:
/// correct with probability `1 − p_x`, flipped with probability `p_x`,
/// with no inconclusive outcome.
pub fn binary_flip_detection(p_x: f64) -> Result<DetectionModel> {
    if !(0.0..=1.0).contains(&p_x) || !p_x.is_finite() {
        return Err(Error::DetectionOutOfRange { value: p_x });
    }
    let p_d = 1.0 - p_x;
    let b1 = Outcome::new(1, 0);
    let b2 = Outcome::new(0, 1);
    let mut rows = BTreeMap::new();
    rows.insert(b1, vec![(b1, p_d), (b2, p_x)]);
    rows.insert(b2, vec![(b2, p_d), (b1, p_x)]);
    Ok(DetectionModel::Kernel(DetectionKernel::new(rows)?))
}

/// The assembled measurement chain.
#[derive(Clone, Debug)]
pub struct MeasurementModel {
    pub prep: PreparationModel,
    pub transfer: Transfer,
    pub detect: DetectionModel,
}

/// Transfer-stage outcome spectra before detection.
fn transfer_distribution(
    prep: &PreparationModel,
    transfer: &Transfer,
) -> Result<BTreeMap<Outcome, TrigSpectrum>> {
    match transfer {
        Transfer::Scattering(s) => {
            Ok(mixed_outcome_distribution(prep.components(), s)?.into_probs())
        }
        Transfer::OnePhotonSinSq => {
            let one_photon = PureState::fock(1).expect("1 photon below ceiling");
            if !prep.is_deterministic(&one_photon) {
                return Err(Error::IncompatibleTransfer {
                    required: "deterministic |1,0⟩ preparation",
                    got: format!("{} component(s)", prep.components().len()),
                });
            }
            let mut probs = BTreeMap::new();
            // sin²φ = 1/2 − cos(2φ)/2, cos²φ = 1/2 + cos(2φ)/2
            probs.insert(
                Outcome::new(1, 0),
                TrigSpectrum::from_coeffs(0.5, vec![0.0, -0.5], vec![]),
            );
            probs.insert(
                Outcome::new(0, 1),
                TrigSpectrum::from_coeffs(0.5, vec![0.0, 0.5], vec![]),
            );
            Ok(probs)
        }
    }
}

fn apply_kernel(
    transfer: &BTreeMap<Outcome, TrigSpectrum>,
    kernel: &DetectionKernel,
) -> Result<BTreeMap<Outcome, TrigSpectrum>> {
    let mut out: BTreeMap<Outcome, TrigSpectrum> = BTreeMap::new();
    for (true_outcome, spectrum) in transfer {
        let row = kernel
            .rows()
            .get(true_outcome)
            .ok_or(Error::MissingKernelRow(*true_outcome))?;
        for (reported, p) in row {
            match out.get_mut(reported) {
                Some(acc) => acc.scaled_add(*p, spectrum),
                None => {
                    out.insert(*reported, spectrum.scaled(*p));
                }
            }
        }
    }
    Ok(out)
}

/// Final outcome spectra of the full chain.
///
/// With ideal detection and deterministic preparation this is exactly the
/// engine distribution, spectrum for spectrum.
pub fn pipeline_distribution(model: &MeasurementModel) -> Result<BTreeMap<Outcome, TrigSpectrum>> {
    let transfer = transfer_distribution(&model.prep, &model.transfer)?;
    let final_probs = match &model.detect {
        DetectionModel::Ideal => transfer,
        DetectionModel::Kernel(kernel) => apply_kernel(&transfer, kernel)?,
    };
    let mut total = TrigSpectrum::zero();
    for spectrum in final_probs.values() {
        total.scaled_add(1.0, spectrum);
    }
    if (total.mean() - 1.0).abs() > 1e-10 || total.max_harmonic_abs() > 1e-10 {
        return Err(Error::NotNormalized { sum: total.mean() });
    }
    Ok(final_probs)
}

/// Pointwise probabilities for a φ-dependent detection kernel, evaluated
/// on a phase grid. Returns, per reported label, the probabilities at each
/// grid phase in order.
pub fn gridded_distribution<F>(
    prep: &PreparationModel,
    transfer: &Transfer,
    kernel_at: F,
    grid: &[f64],
) -> Result<BTreeMap<Outcome, Vec<f64>>>
where
    F: Fn(f64) -> Result<DetectionKernel>,
{
    let spectra = transfer_distribution(prep, transfer)?;
    let mut out: BTreeMap<Outcome, Vec<f64>> = BTreeMap::new();
    for (idx, &phi) in grid.iter().enumerate() {
        let kernel = kernel_at(phi)?;
        for (true_outcome, spectrum) in &spectra {
            let p_true = spectrum.eval(phi);
            let row = kernel
                .rows()
                .get(true_outcome)
                .ok_or(Error::MissingKernelRow(*true_outcome))?;
            for (reported, p) in row {
                let values = out.entry(*reported).or_insert_with(|| vec![0.0; grid.len()]);
                values[idx] += p * p_true;
            }
        }
    }
    Ok(out)
}
