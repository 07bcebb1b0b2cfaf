//! Exact amplitude algebra: complex polynomials in z = e^{iφ} and the real
//! trigonometric spectra of their squared moduli.
//!
//! Carrying amplitudes as polynomials instead of sampling them keeps every
//! outcome probability a closed-form trig polynomial, which in turn gives
//! analytic phase derivatives for Fisher information and spectrally
//! convergent quadrature for fidelity.

use num_complex::Complex64;

/// Trailing coefficients below this fraction of the largest coefficient
/// magnitude are trimmed when a polynomial is put in canonical form.
pub const COEFF_TRIM_TOL: f64 = 1e-14;

/// A polynomial `Σ_p c_p z^p` in `z = e^{iφ}` with complex coefficients.
///
/// The zero polynomial has an empty coefficient list; otherwise the trailing
/// coefficient is nonzero after canonical trimming.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePolynomial {
    coeffs: Vec<Complex64>,
}

impl PhasePolynomial {
    /// Builds a polynomial from coefficients; index p multiplies `e^{ipφ}`.
    ///
    /// Panics if any coefficient is non-finite: amplitudes must never carry
    /// NaN or infinity.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        for (p, c) in coeffs.iter().enumerate() {
            assert!(
                c.re.is_finite() && c.im.is_finite(),
                "non-finite coefficient {c} at power {p}"
            );
        }
        let mut poly = Self { coeffs };
        poly.trim();
        poly
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c · z^power`.
    pub fn monomial(c: Complex64, power: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^p`, zero beyond the stored degree.
    pub fn coeff(&self, p: usize) -> Complex64 {
        self.coeffs
            .get(p)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Degree in z, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Evaluates at a phase via Horner's rule in `z = e^{iφ}`.
    pub fn eval(&self, phi: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, phi);
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Polynomial product by coefficient convolution.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs =
            vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (p, &a) in self.coeffs.iter().enumerate() {
            for (q, &b) in other.coeffs.iter().enumerate() {
                coeffs[p + q] += a * b;
            }
        }
        Self::new(coeffs)
    }

    /// Integer power by repeated multiplication; `a^0` is the unit polynomial.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|p| self.coeff(p) + other.coeff(p)).collect();
        Self::new(coeffs)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// The squared modulus `|A(e^{iφ})|²` as a real trigonometric polynomial.
    ///
    /// The mean is `Σ_p |c_p|²`; harmonic d collects the cross terms
    /// `Σ_p c_{p+d} c̄_p` into cosine and sine coefficients.
    pub fn abs_square(&self) -> TrigSpectrum {
        let n = self.coeffs.len();
        let mean = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        let lags = n.saturating_sub(1);
        let mut cos = vec![0.0; lags];
        let mut sin = vec![0.0; lags];
        for d in 1..=lags {
            let w: Complex64 = (0..n - d)
                .map(|p| self.coeffs[p + d] * self.coeffs[p].conj())
                .sum();
            cos[d - 1] = 2.0 * w.re;
            sin[d - 1] = -2.0 * w.im;
        }
        TrigSpectrum { mean, cos, sin }
    }

    fn trim(&mut self) {
        let max = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
        if max == 0.0 {
            self.coeffs.clear();
            return;
        }
        let cut = COEFF_TRIM_TOL * max;
        while self.coeffs.last().is_some_and(|c| c.norm() <= cut) {
            self.coeffs.pop();
        }
    }
}

impl std::ops::Mul for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn mul(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        PhasePolynomial::mul(self, rhs)
    }
}

impl std::ops::Add for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn add(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        PhasePolynomial::add(self, rhs)
    }
}

/// A real trigonometric polynomial `mean + Σ_p (b_p cos pφ + c_p sin pφ)`.
///
/// This is the exact form of every outcome probability produced by the
/// engine; `cos_coeffs[p-1]` and `sin_coeffs[p-1]` hold the harmonic-p
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigSpectrum {
    mean: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigSpectrum {
    pub fn constant(mean: f64) -> Self {
        Self {
            mean,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Builds a spectrum from explicit harmonic coefficients.
    pub fn from_coeffs(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let len = cos.len().max(sin.len());
        let mut cos = cos;
        let mut sin = sin;
        cos.resize(len, 0.0);
        sin.resize(len, 0.0);
        Self { mean, cos, sin }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// Number of harmonics carried (the degree of the trig polynomial).
    pub fn harmonics(&self) -> usize {
        self.cos.len()
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let mut out = self.mean;
        for p in 1..=self.cos.len() {
            let (s, c) = (p as f64 * phi).sin_cos();
            out += self.cos[p - 1] * c + self.sin[p - 1] * s;
        }
        out
    }

    /// Term-wise derivative in φ: `cos(pφ) → −p sin(pφ)`, `sin(pφ) → p cos(pφ)`.
    pub fn derivative(&self) -> Self {
        let cos = self
            .sin
            .iter()
            .enumerate()
            .map(|(i, &c)| (i + 1) as f64 * c)
            .collect();
        let sin = self
            .cos
            .iter()
            .enumerate()
            .map(|(i, &b)| -((i + 1) as f64) * b)
            .collect();
        Self {
            mean: 0.0,
            cos,
            sin,
        }
    }

    /// Adds `weight · other` in place, extending harmonics as needed.
    pub fn scaled_add(&mut self, weight: f64, other: &Self) {
        self.mean += weight * other.mean;
        if other.cos.len() > self.cos.len() {
            self.cos.resize(other.cos.len(), 0.0);
            self.sin.resize(other.sin.len(), 0.0);
        }
        for (i, &b) in other.cos.iter().enumerate() {
            self.cos[i] += weight * b;
        }
        for (i, &c) in other.sin.iter().enumerate() {
            self.sin[i] += weight * c;
        }
    }

    pub fn scaled(&self, weight: f64) -> Self {
        Self {
            mean: weight * self.mean,
            cos: self.cos.iter().map(|b| weight * b).collect(),
            sin: self.sin.iter().map(|c| weight * c).collect(),
        }
    }

    /// Largest harmonic coefficient magnitude; zero for a constant spectrum.
    pub fn max_harmonic_abs(&self) -> f64 {
        self.cos
            .iter()
            .chain(self.sin.iter())
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}
