//! Univariate polynomials, Sylvester matrices and resultant magnitudes.
//!
//! Two polynomials of equal degree `n` share a root exactly when their
//! `2n x 2n` Sylvester matrix is singular. Instead of the determinant, which
//! scales badly, we measure the distance from singularity with either the
//! last diagonal element of a QR factorization or the smallest singular value.

use nalgebra::DMatrix;
use thiserror::Error;

/// Leading coefficients smaller than this (after normalization) mark a
/// polynomial as degenerate.
pub const DEGENERATE_LEADING_TOL: f64 = 1e-12;

/// Resultant magnitudes at or below this value, on unit-norm inputs, count as
/// a shared root.
pub const ZERO_RESULTANT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolynomialError {
    #[error("polynomial has no nonzero coefficient")]
    ZeroPolynomial,
    #[error("polynomial degree must be at least 1 to build a Sylvester matrix")]
    DegreeTooLow,
    #[error("polynomial needs at least one coefficient")]
    Empty,
}

/// Univariate real polynomial with coefficients in descending degree order
/// (`a_n, ..., a_0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self, PolynomialError> {
        if coeffs.is_empty() {
            return Err(PolynomialError::Empty);
        }
        Ok(Self { coeffs })
    }

    /// Builds a polynomial from ascending-order coefficients (`a_0, ..., a_n`).
    pub fn from_ascending(mut coeffs: Vec<f64>) -> Result<Self, PolynomialError> {
        coeffs.reverse();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Scales the coefficient vector to unit Euclidean norm.
    pub fn normalize(&self) -> Result<Self, PolynomialError> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(PolynomialError::ZeroPolynomial);
        }
        Ok(Self {
            coeffs: self.coeffs.iter().map(|c| c / norm).collect(),
        })
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Evaluates the homogenized polynomial at the unit vector along `(x, 1)`.
    ///
    /// This stays bounded for roots far from the origin, where a plain `eval`
    /// amplifies rounding by `|x|^n`.
    pub fn eval_projective(&self, x: f64) -> f64 {
        let n = self.degree() as i32;
        if x.abs() <= 1.0 {
            self.eval(x) / (1.0 + x * x).powf(f64::from(n) / 2.0)
        } else {
            // x^n q(x) expressed through the reversed polynomial at 1/x.
            let inv = 1.0 / x;
            let reversed = self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * inv + c);
            let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            sign * reversed / (1.0 + inv * inv).powf(f64::from(n) / 2.0)
        }
    }

    /// True when the leading coefficient of the normalized polynomial is
    /// numerically zero.
    pub fn is_degenerate(&self) -> bool {
        match self.normalize() {
            Ok(p) => p.leading().abs() < DEGENERATE_LEADING_TOL,
            Err(_) => true,
        }
    }

    /// Pads with leading zeros up to `degree`. Lower targets are ignored.
    pub fn padded_to(&self, degree: usize) -> Self {
        if degree <= self.degree() {
            return self.clone();
        }
        let mut coeffs = vec![0.0; degree - self.degree()];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }
}

/// Square `2n x 2n` Sylvester matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SylvesterMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SylvesterMatrix {
    /// Degree of the source polynomials.
    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim(), self.dim(), &self.entries)
    }
}

/// Builds the Sylvester matrix of `p` and `q`, padding the lower-degree
/// polynomial with leading zeros.
pub fn sylvester(p: &Polynomial, q: &Polynomial) -> Result<SylvesterMatrix, PolynomialError> {
    let n = p.degree().max(q.degree());
    if n == 0 {
        return Err(PolynomialError::DegreeTooLow);
    }
    let p = p.padded_to(n);
    let q = q.padded_to(n);
    let dim = 2 * n;
    let mut entries = vec![0.0; dim * dim];
    for shift in 0..n {
        for (k, (&a, &b)) in p.coeffs().iter().zip(q.coeffs()).enumerate() {
            entries[shift * dim + shift + k] = a;
            entries[(n + shift) * dim + shift + k] = b;
        }
    }
    Ok(SylvesterMatrix { n, entries })
}

/// Which factorization measures the distance of a Sylvester matrix from
/// singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResultantBackend {
    /// `|R[2n-1, 2n-1]|` from a Householder QR factorization.
    #[default]
    Qr,
    /// Smallest singular value.
    Svd,
}

impl ResultantBackend {
    pub fn magnitude(self, m: &SylvesterMatrix) -> f64 {
        match self {
            Self::Qr => resultant_magnitude_qr(m),
            Self::Svd => resultant_magnitude_svd(m),
        }
    }
}

/// Absolute value of the bottom-right element of `R` in `M = QR`.
pub fn resultant_magnitude_qr(m: &SylvesterMatrix) -> f64 {
    let dim = m.dim();
    let mut a = m.entries.clone();
    householder_upper_triangularize(&mut a, dim);
    a[dim * dim - 1].abs()
}

/// Smallest singular value of `M`.
pub fn resultant_magnitude_svd(m: &SylvesterMatrix) -> f64 {
    m.to_dmatrix().singular_values().min()
}

/// Convenience: normalizes both inputs and returns the resultant magnitude of
/// their Sylvester matrix.
pub fn normalized_resultant(
    p: &Polynomial,
    q: &Polynomial,
    backend: ResultantBackend,
) -> Result<f64, PolynomialError> {
    let m = sylvester(&p.normalize()?, &q.normalize()?)?;
    Ok(backend.magnitude(&m))
}

/// Overwrites the row-major `dim x dim` matrix `a` with the `R` factor of its
/// Householder QR factorization (the reflectors themselves are discarded).
fn householder_upper_triangularize(a: &mut [f64], dim: usize) {
    let mut v = vec![0.0; dim];
    for k in 0..dim.saturating_sub(1) {
        let mut norm_sq = 0.0;
        for i in k..dim {
            norm_sq += a[i * dim + k] * a[i * dim + k];
        }
        let norm = norm_sq.sqrt();
        if norm == 0.0 {
            continue;
        }
        let pivot = a[k * dim + k];
        let alpha = if pivot >= 0.0 { -norm } else { norm };
        // v = x - alpha e_k, reflector H = I - 2 v v^T / (v^T v)
        for i in k..dim {
            v[i] = a[i * dim + k];
        }
        v[k] -= alpha;
        let v_norm_sq = norm_sq - pivot * pivot + v[k] * v[k];
        if v_norm_sq == 0.0 {
            continue;
        }
        a[k * dim + k] = alpha;
        for i in (k + 1)..dim {
            a[i * dim + k] = 0.0;
        }
        for j in (k + 1)..dim {
            let mut dot = 0.0;
            for i in k..dim {
                dot += v[i] * a[i * dim + j];
            }
            let scale = 2.0 * dot / v_norm_sq;
            for i in k..dim {
                a[i * dim + j] -= scale * v[i];
            }
        }
    }
}
