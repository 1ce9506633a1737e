//! Mode-indexed complex matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{FourierField, Truncation};

/// Matrix of an operator in the basis `{e^{ijx}}`, `|j| <= N`.
///
/// Entry `(j, l)` is the coefficient of `e^{ijx}` in the image of `e^{ilx}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    trunc: Truncation,
    data: DMatrix<Complex64>,
}

/// Truncated matrix of `G_θ[0] + M`; Hermitian up to rounding.
pub type HermitianOperatorMatrix = OperatorMatrix;

impl OperatorMatrix {
    pub fn zeros(trunc: Truncation) -> Self {
        Self {
            trunc,
            data: DMatrix::zeros(trunc.dim(), trunc.dim()),
        }
    }

    pub fn identity(trunc: Truncation) -> Self {
        Self {
            trunc,
            data: DMatrix::identity(trunc.dim(), trunc.dim()),
        }
    }

    pub fn from_diagonal(trunc: Truncation, values: &[Complex64]) -> Self {
        let mut data = DMatrix::zeros(trunc.dim(), trunc.dim());
        data.set_diagonal(&nalgebra::DVector::from_column_slice(values));
        Self { trunc, data }
    }

    pub fn from_matrix(trunc: Truncation, data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != trunc.dim() || data.ncols() != trunc.dim() {
            return Err(Error::DimensionMismatch {
                expected: trunc.dim(),
                got: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self { trunc, data })
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn as_matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    /// Entry for modes `(j, l)`; zero when either mode is outside the window.
    pub fn entry(&self, j: i64, l: i64) -> Complex64 {
        match (self.trunc.index(j), self.trunc.index(l)) {
            (Some(r), Some(c)) => self.data[(r, c)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// # Panics
    /// If either mode is outside the window.
    pub fn set(&mut self, j: i64, l: i64, value: Complex64) {
        let r = self.trunc.index(j).expect("row mode outside truncation");
        let c = self.trunc.index(l).expect("column mode outside truncation");
        self.data[(r, c)] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A*|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `max |A + A*|` over all entries.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[(r, c)] + self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian to `rel_tol` relative to the largest entry (absolute below 1).
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_defect() <= rel_tol * self.max_abs().max(1.0)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            trunc: self.trunc,
            data: self.data.adjoint(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            trunc: self.trunc,
            data: &self.data * Complex64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.trunc, other.trunc);
        Self {
            trunc: self.trunc,
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.trunc, other.trunc);
        Self {
            trunc: self.trunc,
            data: &self.data - &other.data,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.trunc, other.trunc);
        Self {
            trunc: self.trunc,
            data: &self.data * &other.data,
        }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Restriction to a smaller, centred window.
    pub fn cropped(&self, trunc: Truncation) -> Self {
        assert!(trunc.cutoff() <= self.trunc.cutoff());
        let offset = self.trunc.cutoff() - trunc.cutoff();
        let data = self
            .data
            .view((offset, offset), (trunc.dim(), trunc.dim()))
            .into_owned();
        Self { trunc, data }
    }

    /// Matrix-vector product; the input is resized onto this window first.
    pub fn apply(&self, field: &FourierField) -> FourierField {
        let v = field.resized(self.trunc);
        let x = nalgebra::DVector::from_column_slice(v.coeffs());
        let y = &self.data * x;
        FourierField::from_coeffs(self.trunc, y.as_slice().to_vec()).expect("dimension preserved")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crop_keeps_centre_block() {
        let big = Truncation::new(3).unwrap();
        let small = Truncation::new(1).unwrap();
        let mut m = OperatorMatrix::zeros(big);
        m.set(1, -1, Complex64::new(2.0, 1.0));
        m.set(3, 3, Complex64::new(9.0, 0.0));
        let c = m.cropped(small);
        assert_eq!(c.entry(1, -1), Complex64::new(2.0, 1.0));
        assert_eq!(c.max_abs(), Complex64::new(2.0, 1.0).norm());
    }

    #[test]
    fn hermiticity_defect_detects_asymmetry() {
        let trunc = Truncation::new(1).unwrap();
        let mut m = OperatorMatrix::zeros(trunc);
        m.set(1, 0, Complex64::new(0.0, 1.0));
        m.set(0, 1, Complex64::new(0.0, -1.0));
        assert_eq!(m.hermiticity_defect(), 0.0);
        assert_eq!(m.anti_hermiticity_defect(), 2.0);
        m.set(0, 1, Complex64::new(0.0, 1.0));
        assert_eq!(m.hermiticity_defect(), 2.0);
    }
}
