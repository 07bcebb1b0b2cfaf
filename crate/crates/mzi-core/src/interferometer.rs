//! Scattering matrices for the lossy and lossless Mach-Zehnder interferometer.
//!
//! Absorption in each arm is modeled by a fictitious beam splitter with
//! reflection amplitude `r_x` (arm with the phase shifter) or `r_y`, coupling
//! the arm to a loss port. The full device is then a 4-mode unitary mapping
//! inputs (a₁, a₂, v₁, v₂) to outputs (b₁, b₂, d₁, d₂), where v₁, v₂ carry
//! vacuum and d₁, d₂ collect the dissipated amplitude. Restricted to the
//! physical ports (a₁, a₂) → (b₁, b₂) the evolution is non-unitary.

use num_complex::Complex64;

use crate::poly::PhasePolynomial;
use crate::{Error, Result};

/// Number of modes in the full (lossy) description.
pub const MODES: usize = 4;

/// Input mode names in column order.
pub const INPUT_MODES: [&str; MODES] = ["a1", "a2", "v1", "v2"];

/// Output mode names in row order.
pub const OUTPUT_MODES: [&str; MODES] = ["b1", "b2", "d1", "d2"];

/// Loss amplitudes and path geometry for the lossy interferometer.
///
/// `r_x`, `r_y` are the reflection amplitudes of the two loss beam splitters;
/// both arms are assumed balanced, with total path length `L`, partial length
/// `l` up to the loss couplers, and mirror phase shifts fixed at π. The path
/// phases cancel in every probability and default to zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossParameters {
    r_x: f64,
    r_y: f64,
    total_length: f64,
    partial_length: f64,
    omega_over_c: f64,
}

impl LossParameters {
    /// Loss amplitudes with zero path phases; rejects values outside [0, 1].
    pub fn new(r_x: f64, r_y: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r_x) || !r_x.is_finite() {
            return Err(Error::LossOutOfRange {
                name: "r_x",
                value: r_x,
            });
        }
        if !(0.0..=1.0).contains(&r_y) || !r_y.is_finite() {
            return Err(Error::LossOutOfRange {
                name: "r_y",
                value: r_y,
            });
        }
        Ok(Self {
            r_x,
            r_y,
            total_length: 0.0,
            partial_length: 0.0,
            omega_over_c: 0.0,
        })
    }

    /// Sets the balanced path geometry (total length L, partial length l)
    /// and the optical frequency over the speed of light.
    pub fn with_path(
        mut self,
        total_length: f64,
        partial_length: f64,
        omega_over_c: f64,
    ) -> Result<Self> {
        for (name, value) in [
            ("total_length", total_length),
            ("partial_length", partial_length),
            ("omega_over_c", omega_over_c),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidLength { name, value });
            }
        }
        self.total_length = total_length;
        self.partial_length = partial_length;
        self.omega_over_c = omega_over_c;
        Ok(self)
    }

    pub fn r_x(&self) -> f64 {
        self.r_x
    }

    pub fn r_y(&self) -> f64 {
        self.r_y
    }
}

/// Phase convention for the dedicated lossless 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LosslessConvention {
    /// The two-port convention with `|S₁₁|² = cos²(φ/2)`, i.e. a one-photon
    /// input at a₁ exits at b₁ with probability cos²(φ/2). The zero-loss
    /// limit of the 4×4 matrix has the opposite (sin²) convention.
    CosSquared,
}

/// A 4×4 matrix of phase polynomials mapping input-mode creation operators
/// to output-mode creation operators.
///
/// Row and column order is fixed as (b₁, b₂, d₁, d₂) × (a₁, a₂, v₁, v₂).
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringMatrix {
    entries: Vec<PhasePolynomial>,
}

impl ScatteringMatrix {
    fn from_rows(rows: [[PhasePolynomial; MODES]; MODES]) -> Self {
        Self {
            entries: rows.into_iter().flatten().collect(),
        }
    }

    /// Entry at (row, col), zero-indexed.
    pub fn entry(&self, row: usize, col: usize) -> &PhasePolynomial {
        assert!(row < MODES && col < MODES, "mode index out of range");
        &self.entries[row * MODES + col]
    }

    /// The polynomials of input column `col`, in output-row order.
    pub fn column(&self, col: usize) -> [&PhasePolynomial; MODES] {
        std::array::from_fn(|row| self.entry(row, col))
    }

    /// Numeric matrix at a fixed phase.
    pub fn eval(&self, phi: f64) -> [[Complex64; MODES]; MODES] {
        std::array::from_fn(|row| std::array::from_fn(|col| self.entry(row, col).eval(phi)))
    }
}

/// Builds the 4×4 scattering matrix of the lossy Mach-Zehnder interferometer.
///
/// At zero loss the matrix is block diagonal: the physical 2×2 block with
/// `|S₁₁|² = sin²(φ/2)` and an inert block coupling the vacuum modes to the
/// loss ports. At full loss (`r_x = r_y = 1`) the physical inputs couple only
/// to the loss ports and the vacuum modes feed the outputs.
pub fn build_lossy_mz(params: &LossParameters) -> ScatteringMatrix {
    let i = Complex64::new(0.0, 1.0);
    let cx = (1.0 - params.r_x * params.r_x).sqrt();
    let cy = (1.0 - params.r_y * params.r_y).sqrt();
    let rx = Complex64::new(params.r_x, 0.0);
    let ry = Complex64::new(params.r_y, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let inv_sqrt2 = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);

    // global path phases: e^{iLω/c} on the physical 2×2 block,
    // e^{i(L−l)ω/c} on the vacuum couplings, e^{ilω/c} on the loss rows
    let w = params.omega_over_c;
    let ph_total = Complex64::from_polar(1.0, params.total_length * w);
    let ph_diff =
        Complex64::from_polar(1.0, (params.total_length - params.partial_length) * w);
    let ph_partial = Complex64::from_polar(1.0, params.partial_length * w);

    let cxz = Complex64::new(cx, 0.0);
    let cyz = Complex64::new(cy, 0.0);

    // (cy − z·cx) and (cy + z·cx) scaled by the leading factors
    let diff = |scale: Complex64| PhasePolynomial::new(vec![scale * cyz, -scale * cxz]);
    let sum = |scale: Complex64| PhasePolynomial::new(vec![scale * cyz, scale * cxz]);

    let rows = [
        [
            diff(i * half * ph_total),
            sum(-half * ph_total),
            PhasePolynomial::constant(i * inv_sqrt2 * rx * ph_diff),
            PhasePolynomial::constant(inv_sqrt2 * ry * ph_diff),
        ],
        [
            sum(-half * ph_total),
            diff(-i * half * ph_total),
            PhasePolynomial::constant(inv_sqrt2 * rx * ph_diff),
            PhasePolynomial::constant(i * inv_sqrt2 * ry * ph_diff),
        ],
        [
            PhasePolynomial::monomial(-i * inv_sqrt2 * rx * ph_partial, 1),
            PhasePolynomial::monomial(-inv_sqrt2 * rx * ph_partial, 1),
            PhasePolynomial::constant(-i * cxz),
            PhasePolynomial::zero(),
        ],
        [
            PhasePolynomial::constant(-inv_sqrt2 * ry * ph_partial),
            PhasePolynomial::constant(-i * inv_sqrt2 * ry * ph_partial),
            PhasePolynomial::zero(),
            PhasePolynomial::constant(-i * cyz),
        ],
    ];
    ScatteringMatrix::from_rows(rows)
}

/// Builds the dedicated lossless 2×2 Mach-Zehnder matrix, embedded in the
/// 4-mode layout with inert loss ports (`d` modes couple only to `v` modes).
///
/// The physical block is `[[−i(1+z)/2, (−1+z)/2], [(−1+z)/2, i(1+z)/2]]`,
/// so `|S₁₁|² = cos²(φ/2)` — the opposite phase convention to the zero-loss
/// limit of [`build_lossy_mz`].
pub fn build_lossless_mz_2x2(convention: LosslessConvention) -> ScatteringMatrix {
    let LosslessConvention::CosSquared = convention;
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    let rows = [
        [
            PhasePolynomial::new(vec![-i * half, -i * half]),
            PhasePolynomial::new(vec![-half, half]),
            PhasePolynomial::zero(),
            PhasePolynomial::zero(),
        ],
        [
            PhasePolynomial::new(vec![-half, half]),
            PhasePolynomial::new(vec![i * half, i * half]),
            PhasePolynomial::zero(),
            PhasePolynomial::zero(),
        ],
        [
            PhasePolynomial::zero(),
            PhasePolynomial::zero(),
            PhasePolynomial::constant(-i),
            PhasePolynomial::zero(),
        ],
        [
            PhasePolynomial::zero(),
            PhasePolynomial::zero(),
            PhasePolynomial::zero(),
            PhasePolynomial::constant(-i),
        ],
    ];
    ScatteringMatrix::from_rows(rows)
}

/// Maximum over the phase grid of the max-norm of `S†(φ)S(φ) − I`.
///
/// Panics on an empty grid.
pub fn unitarity_defect(s: &ScatteringMatrix, phase_grid: &[f64]) -> f64 {
    assert!(!phase_grid.is_empty(), "phase grid must be non-empty");
    let mut worst = 0.0_f64;
    for &phi in phase_grid {
        let m = s.eval(phi);
        for row in 0..MODES {
            for col in 0..MODES {
                let mut v = Complex64::new(0.0, 0.0);
                for k in 0..MODES {
                    v += m[k][row].conj() * m[k][col];
                }
                if row == col {
                    v -= Complex64::new(1.0, 0.0);
                }
                worst = worst.max(v.norm());
            }
        }
    }
    worst
}

/// An evenly spaced phase grid over [−π, π], endpoints included.
pub fn phase_grid(count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let step = 2.0 * std::f64::consts::PI / (count - 1) as f64;
    (0..count)
        .map(|k| -std::f64::consts::PI + step * k as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_out_of_range_loss() {
        assert!(LossParameters::new(-0.1, 0.0).is_err());
        assert!(LossParameters::new(0.0, 1.2).is_err());
        assert!(LossParameters::new(f64::NAN, 0.0).is_err());
        assert!(LossParameters::new(1.0, 1.0).is_ok());
    }

    #[test]
    fn rejects_negative_path_lengths() {
        let p = LossParameters::new(0.1, 0.2).unwrap();
        assert!(p.with_path(-1.0, 0.0, 0.0).is_err());
        assert!(p.with_path(2.0, 1.0, 3.0).is_ok());
    }

    #[test]
    fn zero_loss_block_structure() {
        let s = build_lossy_mz(&LossParameters::new(0.0, 0.0).unwrap());
        // upper-left block: [[i(1−z)/2, −(1+z)/2], [−(1+z)/2, −i(1−z)/2]]
        let half = Complex64::new(0.5, 0.0);
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(s.entry(0, 0).coeffs(), &[i * half, -i * half]);
        assert_eq!(s.entry(0, 1).coeffs(), &[-half, -half]);
        assert_eq!(s.entry(1, 0).coeffs(), &[-half, -half]);
        assert_eq!(s.entry(1, 1).coeffs(), &[-i * half, i * half]);
        // loss block diagonal (−i, −i), off-diagonal blocks zero
        assert_eq!(s.entry(2, 2).coeffs(), &[-i]);
        assert_eq!(s.entry(3, 3).coeffs(), &[-i]);
        for (row, col) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 0), (2, 1), (3, 0), (3, 1)] {
            assert!(s.entry(row, col).is_zero(), "({row},{col}) should vanish");
        }
    }

    #[test]
    fn full_loss_decouples_inputs_from_outputs() {
        let s = build_lossy_mz(&LossParameters::new(1.0, 1.0).unwrap());
        for row in 0..2 {
            for col in 0..2 {
                assert!(s.entry(row, col).is_zero());
            }
        }
        // vacuum modes couple to the outputs
        for row in 0..2 {
            assert!(!s.entry(row, 2).is_zero());
            assert!(!s.entry(row, 3).is_zero());
        }
    }

    #[test]
    fn entry_degrees() {
        let s = build_lossy_mz(&LossParameters::new(0.3, 0.4).unwrap());
        for (row, col) in [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0), (2, 1)] {
            assert_eq!(s.entry(row, col).degree(), Some(1), "({row},{col})");
        }
        for (row, col) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 2), (3, 0), (3, 1), (3, 3)] {
            assert_eq!(s.entry(row, col).degree(), Some(0), "({row},{col})");
        }
        assert!(s.entry(2, 3).is_zero());
        assert!(s.entry(3, 2).is_zero());
    }

    #[test]
    fn unitary_on_loss_grid() {
        let grid = phase_grid(32);
        for ix in 0..5 {
            for iy in 0..5 {
                let params =
                    LossParameters::new(ix as f64 * 0.25, iy as f64 * 0.25).unwrap();
                let defect = unitarity_defect(&build_lossy_mz(&params), &grid);
                assert!(defect < 1e-12, "defect {defect} at ({ix},{iy})");
            }
        }
    }

    #[test]
    fn unitary_with_path_phases() {
        let params = LossParameters::new(0.3, 0.4)
            .unwrap()
            .with_path(2.5, 1.0, 1.7)
            .unwrap();
        assert!(unitarity_defect(&build_lossy_mz(&params), &phase_grid(32)) < 1e-12);
    }

    #[test]
    fn unitary_at_extreme_loss() {
        let params = LossParameters::new(1.0, 0.0).unwrap();
        assert!(unitarity_defect(&build_lossy_mz(&params), &phase_grid(32)) < 1e-12);
    }

    #[test]
    fn corrupted_entry_is_detected() {
        let mut s = build_lossy_mz(&LossParameters::new(0.3, 0.4).unwrap());
        let bad = s.entry(0, 0).scale(Complex64::new(1.01, 0.0));
        s.entries[0] = bad;
        assert!(unitarity_defect(&s, &phase_grid(32)) > 1e-3);
    }

    #[test]
    fn lossless_2x2_probability_convention() {
        let s = build_lossless_mz_2x2(LosslessConvention::CosSquared);
        for k in 0..33 {
            let phi = -std::f64::consts::PI + k as f64 * std::f64::consts::PI / 16.0;
            let p = s.entry(0, 0).eval(phi).norm_sqr();
            assert_abs_diff_eq!(p, (phi / 2.0).cos().powi(2), epsilon = 1e-14);
        }
    }

    #[test]
    fn lossless_2x2_at_zero_phase() {
        let s = build_lossless_mz_2x2(LosslessConvention::CosSquared);
        let m = s.eval(0.0);
        let i = Complex64::new(0.0, 1.0);
        assert!((m[0][0] + i).norm() < 1e-15);
        assert!(m[0][1].norm() < 1e-15);
        assert!(m[1][0].norm() < 1e-15);
        assert!((m[1][1] - i).norm() < 1e-15);
    }

    #[test]
    fn lossless_2x2_unitary() {
        let s = build_lossless_mz_2x2(LosslessConvention::CosSquared);
        assert!(unitarity_defect(&s, &phase_grid(64)) < 1e-14);
    }
}
