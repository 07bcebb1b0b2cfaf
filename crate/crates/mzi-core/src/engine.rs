//! Exact evolution of multimode Fock states through a scattering matrix.
//!
//! Each input creation operator maps to a column of the matrix,
//! `a_j† → Σ_i S_ij b_i†`, so a power of it expands multinomially over
//! output occupations with phase-polynomial amplitudes. Marginalizing the
//! loss ports then yields the exact photon-count distribution at the two
//! physical outputs as a function of φ.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::interferometer::{ScatteringMatrix, MODES};
use crate::poly::{PhasePolynomial, TrigSpectrum};
use crate::{Error, Result};

/// Engine ceiling on the total photon number, guarding factorial blowup.
pub const MAX_PHOTONS: u32 = 12;

/// Photon counts per mode, in the fixed mode order of the scattering matrix:
/// (a₁, a₂, v₁, v₂) on input, (b₁, b₂, d₁, d₂) on output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(pub [u32; MODES]);

impl Occupation {
    pub fn vacuum() -> Self {
        Self([0; MODES])
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Detected photon pair at the physical output ports (b₁, b₂).
    pub fn detected(&self) -> Outcome {
        Outcome {
            n: self.0[0],
            m: self.0[1],
        }
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [n1, n2, n3, n4] = self.0;
        write!(f, "|{n1},{n2},{n3},{n4}⟩")
    }
}

/// A detected photon pair (n, m) at output ports (b₁, b₂).
///
/// The zero-photon pair (0, 0) is the inconclusive outcome: nothing fired,
/// either because the preparation produced vacuum or because every photon
/// was absorbed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub n: u32,
    pub m: u32,
}

impl Outcome {
    pub const INCONCLUSIVE: Outcome = Outcome { n: 0, m: 0 };

    pub fn new(n: u32, m: u32) -> Self {
        Self { n, m }
    }

    pub fn is_inconclusive(&self) -> bool {
        self.n == 0 && self.m == 0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// A pure input state as a superposition of input Fock occupations.
///
/// Amplitudes refer to normalized Fock states; the squared amplitudes sum
/// to one and the vacuum ports v₁, v₂ are always unoccupied.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    terms: Vec<(Complex64, Occupation)>,
}

impl PureState {
    /// Vacuum in all four modes.
    pub fn vacuum() -> Self {
        Self {
            terms: vec![(Complex64::new(1.0, 0.0), Occupation::vacuum())],
        }
    }

    /// The Fock state |N,0⟩: N photons in port a₁.
    pub fn fock(n: u32) -> Result<Self> {
        Self::fock_pair(n, 0)
    }

    /// The product Fock state |n,m⟩ across ports a₁ and a₂.
    pub fn fock_pair(n: u32, m: u32) -> Result<Self> {
        Self::from_terms(vec![(Complex64::new(1.0, 0.0), Occupation([n, m, 0, 0]))])
    }

    /// The N00N state (|N,0⟩ + |0,N⟩)/√2.
    pub fn noon(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidState(
                "N00N state needs at least one photon".into(),
            ));
        }
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_terms(vec![
            (amp, Occupation([n, 0, 0, 0])),
            (amp, Occupation([0, n, 0, 0])),
        ])
    }

    /// Builds a superposition from (amplitude, occupation) terms.
    ///
    /// Rejects non-normalized amplitudes, duplicate occupations, photons in
    /// the vacuum ports, and totals above [`MAX_PHOTONS`].
    pub fn from_terms(terms: Vec<(Complex64, Occupation)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidState("state has no terms".into()));
        }
        let mut norm = 0.0;
        for (amp, occ) in &terms {
            if !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::InvalidState(format!(
                    "non-finite amplitude on {occ}"
                )));
            }
            if occ.0[2] != 0 || occ.0[3] != 0 {
                return Err(Error::InvalidState(format!(
                    "term {occ} occupies a vacuum port"
                )));
            }
            let total = occ.total();
            if total > MAX_PHOTONS {
                return Err(Error::PhotonLimit {
                    total,
                    max: MAX_PHOTONS,
                });
            }
            norm += amp.norm_sqr();
        }
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "squared amplitudes sum to {norm}, expected 1"
            )));
        }
        for i in 0..terms.len() {
            for j in i + 1..terms.len() {
                if terms[i].1 == terms[j].1 {
                    return Err(Error::InvalidState(format!(
                        "duplicate occupation {}",
                        terms[i].1
                    )));
                }
            }
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(Complex64, Occupation)] {
        &self.terms
    }

    /// Largest total photon number over the superposition terms.
    pub fn max_photons(&self) -> u32 {
        self.terms.iter().map(|(_, occ)| occ.total()).max().unwrap_or(0)
    }
}

/// Exact `n!` for the photon numbers the engine admits.
pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

fn occupation_norm(occ: &Occupation) -> f64 {
    occ.0.iter().map(|&k| factorial(k)).product::<f64>().sqrt()
}

/// One output term of a single-mode multinomial expansion.
#[derive(Clone, Debug)]
pub struct ModeTerm {
    /// Amplitude onto the normalized output Fock state: the product of
    /// column entries times √(multinomial weight).
    pub amplitude: PhasePolynomial,
    /// The multinomial weight `power! / (n! m! k! l!)`.
    pub multinomial: u64,
}

/// Expands `(Σ_i S_{i,mode} b_i†)^power` over output occupations.
///
/// Unreachable occupations (a zero matrix entry raised to a positive power)
/// are omitted.
pub fn expand_input_mode(
    s: &ScatteringMatrix,
    input_mode: usize,
    power: u32,
) -> BTreeMap<Occupation, ModeTerm> {
    assert!(input_mode < MODES, "input mode out of range");
    assert!(power <= MAX_PHOTONS, "power above engine ceiling");
    let column = s.column(input_mode);
    let mut out = BTreeMap::new();
    for occ in compositions(power) {
        let mut poly = PhasePolynomial::one();
        let mut reachable = true;
        for (i, &count) in occ.0.iter().enumerate() {
            if count == 0 {
                continue;
            }
            if column[i].is_zero() {
                reachable = false;
                break;
            }
            poly = poly.mul(&column[i].pow(count));
        }
        if !reachable || poly.is_zero() {
            continue;
        }
        let multinomial = multinomial_weight(power, &occ.0);
        let amplitude = poly.scale(Complex64::new((multinomial as f64).sqrt(), 0.0));
        out.insert(
            occ,
            ModeTerm {
                amplitude,
                multinomial,
            },
        );
    }
    out
}

fn multinomial_weight(total: u32, parts: &[u32; MODES]) -> u64 {
    let num: u64 = (1..=total as u64).product();
    let den: u64 = parts
        .iter()
        .map(|&k| (1..=k as u64).product::<u64>())
        .product();
    num / den
}

/// All occupations of `total` photons over the four modes.
fn compositions(total: u32) -> Vec<Occupation> {
    let mut out = Vec::new();
    for n in 0..=total {
        for m in 0..=total - n {
            for k in 0..=total - n - m {
                out.push(Occupation([n, m, k, total - n - m - k]));
            }
        }
    }
    out
}

/// Raw operator coefficients of `(Σ_i S_{i,mode} b_i†)^power`, i.e. the
/// multinomial weight times the column-entry product, without state
/// normalization. These convolve across modes.
fn raw_mode_expansion(
    s: &ScatteringMatrix,
    input_mode: usize,
    power: u32,
) -> BTreeMap<Occupation, PhasePolynomial> {
    expand_input_mode(s, input_mode, power)
        .into_iter()
        .map(|(occ, term)| {
            let w = Complex64::new((term.multinomial as f64).sqrt(), 0.0);
            (occ, term.amplitude.scale(w))
        })
        .collect()
}

fn convolve(
    a: &BTreeMap<Occupation, PhasePolynomial>,
    b: &BTreeMap<Occupation, PhasePolynomial>,
) -> BTreeMap<Occupation, PhasePolynomial> {
    let mut out: BTreeMap<Occupation, PhasePolynomial> = BTreeMap::new();
    for (ea, pa) in a {
        for (eb, pb) in b {
            let occ = Occupation(std::array::from_fn(|i| ea.0[i] + eb.0[i]));
            let prod = pa.mul(pb);
            match out.get_mut(&occ) {
                Some(acc) => *acc = acc.add(&prod),
                None => {
                    out.insert(occ, prod);
                }
            }
        }
    }
    out
}

/// Evolves a pure state, returning the amplitude onto each normalized
/// output occupation as a phase polynomial.
///
/// Superposition terms are expanded branch by branch and their amplitudes
/// added per occupation before any squaring, so interference between
/// branches (as in N00N input) is retained.
pub fn evolve(
    state: &PureState,
    s: &ScatteringMatrix,
) -> BTreeMap<Occupation, PhasePolynomial> {
    let mut acc: BTreeMap<Occupation, PhasePolynomial> = BTreeMap::new();
    for (amp, occ) in state.terms() {
        let mut folded: BTreeMap<Occupation, PhasePolynomial> = BTreeMap::new();
        folded.insert(Occupation::vacuum(), PhasePolynomial::one());
        for (mode, &count) in occ.0.iter().enumerate() {
            if count > 0 {
                folded = convolve(&folded, &raw_mode_expansion(s, mode, count));
            }
        }
        let input_norm = occupation_norm(occ);
        for (out_occ, poly) in folded {
            let scale = *amp * Complex64::new(occupation_norm(&out_occ) / input_norm, 0.0);
            let contribution = poly.scale(scale);
            match acc.get_mut(&out_occ) {
                Some(existing) => *existing = existing.add(&contribution),
                None => {
                    acc.insert(out_occ, contribution);
                }
            }
        }
    }
    acc.retain(|_, poly| !poly.is_zero());
    acc
}

/// Exact outcome probabilities over detected photon pairs, as functions
/// of φ, with the loss ports marginalized out.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    probs: BTreeMap<Outcome, TrigSpectrum>,
    n_max: u32,
}

impl OutcomeDistribution {
    pub fn probs(&self) -> &BTreeMap<Outcome, TrigSpectrum> {
        &self.probs
    }

    pub fn into_probs(self) -> BTreeMap<Outcome, TrigSpectrum> {
        self.probs
    }

    /// Largest total photon number of the originating input state.
    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Probability of one outcome at a phase; zero for absent outcomes.
    pub fn probability(&self, outcome: Outcome, phi: f64) -> f64 {
        self.probs.get(&outcome).map_or(0.0, |s| s.eval(phi))
    }

    /// Sum of all outcome spectra; the constant 1 for a valid distribution.
    pub fn total_spectrum(&self) -> TrigSpectrum {
        let mut total = TrigSpectrum::zero();
        for spectrum in self.probs.values() {
            total.scaled_add(1.0, spectrum);
        }
        total
    }
}

/// Probability distribution of detected photon pairs (n, m) for a pure
/// input state: `P(n,m|φ) = Σ_{k,l} |amplitude(n,m,k,l)|²`.
pub fn outcome_distribution(state: &PureState, s: &ScatteringMatrix) -> OutcomeDistribution {
    let mut probs: BTreeMap<Outcome, TrigSpectrum> = BTreeMap::new();
    for (occ, poly) in evolve(state, s) {
        let spectrum = poly.abs_square();
        match probs.get_mut(&occ.detected()) {
            Some(acc) => acc.scaled_add(1.0, &spectrum),
            None => {
                probs.insert(occ.detected(), spectrum);
            }
        }
    }
    OutcomeDistribution {
        probs,
        n_max: state.max_photons(),
    }
}

/// Outcome distribution of a diagonal mixture of pure states.
///
/// Weights must be non-negative and sum to one within 1e−12.
pub fn mixed_outcome_distribution(
    mixture: &[(f64, PureState)],
    s: &ScatteringMatrix,
) -> Result<OutcomeDistribution> {
    let mut sum = 0.0;
    for (weight, _) in mixture {
        if *weight < 0.0 || !weight.is_finite() {
            return Err(Error::NegativeWeight { weight: *weight });
        }
        sum += weight;
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::MixtureNotNormalized { sum });
    }
    let mut probs: BTreeMap<Outcome, TrigSpectrum> = BTreeMap::new();
    let mut n_max = 0;
    for (weight, state) in mixture {
        let component = outcome_distribution(state, s);
        n_max = n_max.max(component.n_max);
        for (outcome, spectrum) in component.probs {
            match probs.get_mut(&outcome) {
                Some(acc) => acc.scaled_add(*weight, &spectrum),
                None => {
                    probs.insert(outcome, spectrum.scaled(*weight));
                }
            }
        }
    }
    Ok(OutcomeDistribution { probs, n_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{
        build_lossless_mz_2x2, build_lossy_mz, LossParameters, LosslessConvention,
    };
    use approx::assert_abs_diff_eq;

    fn lossy(rx: f64, ry: f64) -> ScatteringMatrix {
        build_lossy_mz(&LossParameters::new(rx, ry).unwrap())
    }

    fn phases() -> Vec<f64> {
        (0..32)
            .map(|k| -std::f64::consts::PI + k as f64 * std::f64::consts::PI / 16.0)
            .collect()
    }

    #[test]
    fn state_validation() {
        assert!(PureState::fock(13).is_err());
        assert!(PureState::noon(0).is_err());
        assert!(PureState::from_terms(vec![(
            Complex64::new(0.5, 0.0),
            Occupation([1, 0, 0, 0])
        )])
        .is_err());
        assert!(PureState::from_terms(vec![(
            Complex64::new(1.0, 0.0),
            Occupation([0, 0, 1, 0])
        )])
        .is_err());
    }

    #[test]
    fn expand_power_zero_is_vacuum() {
        let map = expand_input_mode(&lossy(0.3, 0.4), 0, 0);
        assert_eq!(map.len(), 1);
        let term = &map[&Occupation::vacuum()];
        assert_eq!(term.multinomial, 1);
        assert_eq!(term.amplitude, PhasePolynomial::one());
    }

    #[test]
    fn expand_single_photon_zero_loss() {
        let map = expand_input_mode(&lossy(0.0, 0.0), 0, 1);
        assert_eq!(map.len(), 2);
        let b1 = &map[&Occupation([1, 0, 0, 0])];
        let b2 = &map[&Occupation([0, 1, 0, 0])];
        // b₁ amplitude i(1−z)/2, b₂ amplitude −(1+z)/2
        let i = Complex64::new(0.0, 0.5);
        assert_eq!(b1.amplitude.coeffs(), &[i, -i]);
        assert_eq!(
            b2.amplitude.coeffs(),
            &[Complex64::new(-0.5, 0.0), Complex64::new(-0.5, 0.0)]
        );
    }

    #[test]
    fn expand_matches_repeated_operator_product() {
        // cube the column-1 operator sum by repeated symbolic multiplication
        let s = lossy(0.3, 0.4);
        let column = s.column(0);
        let mut ops: BTreeMap<Occupation, PhasePolynomial> = BTreeMap::new();
        ops.insert(Occupation::vacuum(), PhasePolynomial::one());
        for _ in 0..3 {
            let mut next: BTreeMap<Occupation, PhasePolynomial> = BTreeMap::new();
            for (occ, poly) in &ops {
                for i in 0..MODES {
                    if column[i].is_zero() {
                        continue;
                    }
                    let mut arr = occ.0;
                    arr[i] += 1;
                    let prod = poly.mul(column[i]);
                    match next.get_mut(&Occupation(arr)) {
                        Some(acc) => *acc = acc.add(&prod),
                        None => {
                            next.insert(Occupation(arr), prod);
                        }
                    }
                }
            }
            ops = next;
        }
        let expanded = expand_input_mode(&s, 0, 3);
        assert_eq!(ops.len(), expanded.len());
        for (occ, brute) in &ops {
            let term = &expanded[occ];
            // raw coefficient = amplitude × √multinomial
            let raw = term
                .amplitude
                .scale(Complex64::new((term.multinomial as f64).sqrt(), 0.0));
            for p in 0..=brute.degree().unwrap_or(0) {
                assert!(
                    (brute.coeff(p) - raw.coeff(p)).norm() < 1e-12,
                    "mismatch at {occ}, power {p}"
                );
            }
        }
    }

    #[test]
    fn vacuum_evolves_to_vacuum() {
        let amps = evolve(&PureState::vacuum(), &lossy(0.7, 0.2));
        assert_eq!(amps.len(), 1);
        let poly = &amps[&Occupation::vacuum()];
        assert_eq!(poly, &PhasePolynomial::one());
    }

    #[test]
    fn lossless_single_photon_stays_in_photon_sector() {
        let dist = outcome_distribution(&PureState::fock(1).unwrap(), &lossy(0.0, 0.0));
        for phi in phases() {
            let total: f64 = [Outcome::new(1, 0), Outcome::new(0, 1)]
                .iter()
                .map(|&o| dist.probability(o, phi))
                .sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
        assert_eq!(dist.probability(Outcome::INCONCLUSIVE, 0.5), 0.0);
    }

    #[test]
    fn noon2_has_no_coincidence_amplitude() {
        for (rx, ry) in [(0.0, 0.0), (0.3, 0.4), (0.9, 0.1), (1.0, 1.0)] {
            let amps = evolve(&PureState::noon(2).unwrap(), &lossy(rx, ry));
            assert!(
                !amps.contains_key(&Occupation([1, 1, 0, 0])),
                "coincidence amplitude should cancel at ({rx},{ry})"
            );
        }
    }

    #[test]
    fn normalization_over_states_and_losses() {
        let states: Vec<PureState> = (1..=5)
            .map(|n| PureState::fock(n).unwrap())
            .chain((1..=5).map(|n| PureState::noon(n).unwrap()))
            .collect();
        for state in &states {
            for ix in 0..5 {
                for iy in 0..5 {
                    let s = lossy(ix as f64 * 0.25, iy as f64 * 0.25);
                    let total = outcome_distribution(state, &s).total_spectrum();
                    assert_abs_diff_eq!(total.mean(), 1.0, epsilon = 1e-10);
                    assert!(total.max_harmonic_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn lossless_conserves_photon_number() {
        for n in 1..=4 {
            let dist = outcome_distribution(&PureState::fock(n).unwrap(), &lossy(0.0, 0.0));
            for (outcome, spectrum) in dist.probs() {
                if outcome.n + outcome.m != n {
                    assert!(spectrum.mean().abs() < 1e-14);
                    assert!(spectrum.max_harmonic_abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn loss_swap_symmetry_for_fock_input() {
        for n in 1..=4 {
            let state = PureState::fock(n).unwrap();
            let a = outcome_distribution(&state, &lossy(0.3, 0.8));
            let b = outcome_distribution(&state, &lossy(0.8, 0.3));
            for phi in phases() {
                for (outcome, spectrum) in a.probs() {
                    assert_abs_diff_eq!(
                        spectrum.eval(phi),
                        b.probability(*outcome, phi),
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn noon1_matches_fock_with_shifted_phase() {
        let s = lossy(0.35, 0.6);
        let fock = outcome_distribution(&PureState::fock(1).unwrap(), &s);
        let noon = outcome_distribution(&PureState::noon(1).unwrap(), &s);
        for phi in phases() {
            for (outcome, spectrum) in noon.probs() {
                let expect = fock.probability(*outcome, std::f64::consts::FRAC_PI_2 - phi);
                assert_abs_diff_eq!(spectrum.eval(phi), expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn mixture_weight_validation() {
        let s = lossy(0.0, 0.0);
        let m = vec![(0.5, PureState::vacuum()), (0.6, PureState::fock(1).unwrap())];
        assert!(matches!(
            mixed_outcome_distribution(&m, &s),
            Err(Error::MixtureNotNormalized { .. })
        ));
        let m = vec![(-0.1, PureState::vacuum()), (1.1, PureState::fock(1).unwrap())];
        assert!(matches!(
            mixed_outcome_distribution(&m, &s),
            Err(Error::NegativeWeight { .. })
        ));
    }

    #[test]
    fn single_component_mixture_matches_pure() {
        let s = lossy(0.4, 0.7);
        let state = PureState::fock(2).unwrap();
        let pure = outcome_distribution(&state, &s);
        let mixed = mixed_outcome_distribution(&[(1.0, state)], &s).unwrap();
        assert_eq!(pure, mixed);
    }

    #[test]
    fn vacuum_fock_mixture_through_lossless_2x2() {
        let s = build_lossless_mz_2x2(LosslessConvention::CosSquared);
        let p1 = 0.7;
        let mix = vec![
            (1.0 - p1, PureState::vacuum()),
            (p1, PureState::fock(1).unwrap()),
        ];
        let dist = mixed_outcome_distribution(&mix, &s).unwrap();
        for phi in phases() {
            assert_abs_diff_eq!(
                dist.probability(Outcome::new(1, 0), phi),
                p1 * (phi / 2.0).cos().powi(2),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                dist.probability(Outcome::new(0, 1), phi),
                p1 * (phi / 2.0).sin().powi(2),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                dist.probability(Outcome::INCONCLUSIVE, phi),
                1.0 - p1,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn balanced_one_photon_mixture_is_phase_flat() {
        let s = lossy(0.0, 0.0);
        let mix = vec![
            (0.5, PureState::fock_pair(1, 0).unwrap()),
            (0.5, PureState::fock_pair(0, 1).unwrap()),
        ];
        let dist = mixed_outcome_distribution(&mix, &s).unwrap();
        for phi in phases() {
            assert_abs_diff_eq!(dist.probability(Outcome::new(1, 0), phi), 0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(dist.probability(Outcome::new(0, 1), phi), 0.5, epsilon = 1e-12);
        }
    }
}
