//! Truncated Fourier algebra on the periodized interval `[0, 2π)`.
//!
//! Everything here works on the mode window `{-N, ..., N}`. Mode `j` lives in
//! row `j + N` of every vector and matrix built by this crate.

use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::OperatorMatrix;

/// Mode window `{-N, ..., N}` of a Fourier–Galerkin discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    cutoff: usize,
}

impl Truncation {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidTruncation(cutoff));
        }
        Ok(Self { cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Matrix dimension `2N + 1`.
    pub fn dim(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn contains(&self, mode: i64) -> bool {
        mode.unsigned_abs() as usize <= self.cutoff
    }

    /// Row index of mode `j`, or `None` outside the window.
    pub fn index(&self, mode: i64) -> Option<usize> {
        self.contains(mode)
            .then(|| (mode + self.cutoff as i64) as usize)
    }

    pub fn mode(&self, index: usize) -> i64 {
        index as i64 - self.cutoff as i64
    }

    pub fn modes(&self) -> impl Iterator<Item = i64> + Clone {
        let n = self.cutoff as i64;
        -n..=n
    }

    /// Window widened by `extra` modes on each side.
    pub fn widened(&self, extra: usize) -> Self {
        Self {
            cutoff: self.cutoff + extra,
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N={}", self.cutoff)
    }
}

/// Bloch (quasi-momentum) parameter, reduced into `[-1/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BlochParameter(f64);

impl BlochParameter {
    pub fn new(theta: f64) -> Self {
        let mut reduced = theta - (theta + 0.5).floor();
        // floor can land exactly on +1/2 through rounding
        if reduced >= 0.5 {
            reduced -= 1.0;
        }
        Self(reduced)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl From<BlochParameter> for f64 {
    fn from(theta: BlochParameter) -> f64 {
        theta.0
    }
}

/// Complex Fourier amplitudes on a mode window.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    trunc: Truncation,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(trunc: Truncation) -> Self {
        Self {
            trunc,
            coeffs: vec![Complex64::new(0.0, 0.0); trunc.dim()],
        }
    }

    /// Coefficients listed in mode order `-N..=N`.
    pub fn from_coeffs(trunc: Truncation, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != trunc.dim() {
            return Err(Error::DimensionMismatch {
                expected: trunc.dim(),
                got: coeffs.len(),
            });
        }
        Ok(Self { trunc, coeffs })
    }

    /// Field from sparse `(mode, amplitude)` pairs. The window is the smallest
    /// one containing every listed mode (at least `N = 1`). Repeated modes add.
    pub fn from_modes(modes: &[(i64, Complex64)]) -> Self {
        let cutoff = modes
            .iter()
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
            .max(1);
        let trunc = Truncation { cutoff };
        let mut field = Self::zeros(trunc);
        for &(k, c) in modes {
            field.coeffs[trunc.index(k).unwrap()] += c;
        }
        field
    }

    /// The single mode `e^{ijx}`.
    pub fn unit(trunc: Truncation, mode: i64) -> Result<Self> {
        let index = trunc.index(mode).ok_or(Error::DimensionMismatch {
            expected: trunc.dim(),
            got: mode.unsigned_abs() as usize,
        })?;
        let mut field = Self::zeros(trunc);
        field.coeffs[index] = Complex64::new(1.0, 0.0);
        Ok(field)
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    /// Amplitude of mode `k`; zero outside the stored window.
    pub fn coeff(&self, mode: i64) -> Complex64 {
        self.trunc
            .index(mode)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, mode: i64, value: Complex64) -> Result<()> {
        let index = self.trunc.index(mode).ok_or(Error::DimensionMismatch {
            expected: self.trunc.dim(),
            got: mode.unsigned_abs() as usize,
        })?;
        self.coeffs[index] = value;
        Ok(())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Modes with nonzero amplitude.
    pub fn support(&self) -> Vec<i64> {
        self.trunc
            .modes()
            .zip(&self.coeffs)
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    /// Largest `|k|` in the support (0 for the zero field).
    pub fn max_mode(&self) -> usize {
        self.support()
            .into_iter()
            .map(|k| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    /// Checks `c_{-k} = conj(c_k)` relative to the largest amplitude.
    pub fn is_real_valued(&self, rel_tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.trunc
            .modes()
            .all(|k| (self.coeff(-k) - self.coeff(k).conj()).norm() <= rel_tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn norm_l2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Σ conj(a_j) b_j` over the coefficient vector.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.trunc
            .modes()
            .map(|k| self.coeff(k).conj() * other.coeff(k))
            .sum()
    }

    /// Same amplitudes on another window (zero padding or cropping).
    pub fn resized(&self, trunc: Truncation) -> Self {
        let coeffs = trunc.modes().map(|k| self.coeff(k)).collect();
        Self { trunc, coeffs }
    }

    /// Value of `Σ c_j e^{ijx}` at a single point.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.trunc
            .modes()
            .zip(&self.coeffs)
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * x))
            .sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Componentwise sum on the union of both windows.
    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    /// Componentwise difference on the union of both windows.
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let trunc = if self.trunc.cutoff >= other.trunc.cutoff {
            self.trunc
        } else {
            other.trunc
        };
        let coeffs = trunc
            .modes()
            .map(|k| f(self.coeff(k), other.coeff(k)))
            .collect();
        Self { trunc, coeffs }
    }
}

fn check_grid(trunc: Truncation, grid_size: usize) -> Result<()> {
    let required = 2 * trunc.cutoff() + 2;
    if grid_size < required {
        return Err(Error::Aliasing {
            grid: grid_size,
            max_mode: trunc.cutoff(),
            required,
        });
    }
    Ok(())
}

/// Samples of `Σ c_j e^{ijx}` at `x_m = 2πm / grid_size`.
pub fn synthesize(field: &FourierField, grid_size: usize) -> Result<Vec<Complex64>> {
    check_grid(field.trunc, grid_size)?;
    let mut buffer = vec![Complex64::new(0.0, 0.0); grid_size];
    for (k, c) in field.trunc.modes().zip(&field.coeffs) {
        buffer[k.rem_euclid(grid_size as i64) as usize] = *c;
    }
    FftPlanner::new()
        .plan_fft_inverse(grid_size)
        .process(&mut buffer);
    Ok(buffer)
}

/// Inverse of [`synthesize`]: amplitudes of modes `-N..=N` from uniform samples.
pub fn analyze(samples: &[Complex64], trunc: Truncation) -> Result<FourierField> {
    let grid_size = samples.len();
    check_grid(trunc, grid_size)?;
    let mut buffer = samples.to_vec();
    FftPlanner::new()
        .plan_fft_forward(grid_size)
        .process(&mut buffer);
    let scale = 1.0 / grid_size as f64;
    let coeffs = trunc
        .modes()
        .map(|k| buffer[k.rem_euclid(grid_size as i64) as usize] * scale)
        .collect();
    Ok(FourierField { trunc, coeffs })
}

/// `sech(z)` in the overflow-free form `2e^{-|z|} / (1 + e^{-2|z|})`.
pub fn stable_sech(z: f64) -> f64 {
    let decay = (-z.abs()).exp();
    2.0 * decay / (1.0 + decay * decay)
}

/// Flat-bottom dispersion symbol `k tanh(hk)`.
pub fn tanh_symbol(k: f64, depth: f64) -> f64 {
    k * (depth * k).tanh()
}

/// Bottom-coupling symbol `k sech(hk)`.
pub fn sech_symbol(k: f64, depth: f64) -> f64 {
    k * stable_sech(depth * k)
}

/// Diagonal operator acting on mode `j` as multiplication by `f(j + θ)`.
///
/// `theta` is a raw wavenumber shift; it is not reduced modulo one, so
/// `θ + 1` yields the same diagonal with mode labels shifted by one.
pub fn diag_symbol<F>(f: F, theta: f64, trunc: Truncation) -> OperatorMatrix
where
    F: Fn(f64) -> f64,
{
    let values: Vec<Complex64> = trunc
        .modes()
        .map(|j| Complex64::new(f(j as f64 + theta), 0.0))
        .collect();
    OperatorMatrix::from_diagonal(trunc, &values)
}

/// Matrix of pointwise multiplication by `field`: entry `(j, l)` is `c_{j-l}`.
pub fn toeplitz_mult(field: &FourierField, trunc: Truncation) -> OperatorMatrix {
    let mut out = OperatorMatrix::zeros(trunc);
    for j in trunc.modes() {
        for l in trunc.modes() {
            let c = field.coeff(j - l);
            if c.norm() > 0.0 {
                out.set(j, l, c);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn bloch_parameter_reduces_into_half_open_interval() {
        assert_eq!(BlochParameter::new(0.5).value(), -0.5);
        assert_eq!(BlochParameter::new(-0.5).value(), -0.5);
        assert_abs_diff_eq!(BlochParameter::new(1.25).value(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(BlochParameter::new(-0.75).value(), 0.25, epsilon = 1e-15);
        assert_eq!(BlochParameter::new(0.0).value(), 0.0);
    }

    #[test]
    fn truncation_index_map_is_a_bijection() {
        let trunc = Truncation::new(3).unwrap();
        assert_eq!(trunc.dim(), 7);
        for (i, j) in trunc.modes().enumerate() {
            assert_eq!(trunc.index(j), Some(i));
            assert_eq!(trunc.mode(i), j);
        }
        assert_eq!(trunc.index(4), None);
        assert!(Truncation::new(0).is_err());
    }

    #[test]
    fn constant_mode_synthesizes_to_constant() {
        let field = FourierField::from_modes(&[(0, c(1.0))]);
        let samples = synthesize(&field, 8).unwrap();
        for s in samples {
            assert_abs_diff_eq!(s.re, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(s.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn cosine_pair_synthesizes_to_cosine() {
        let field = FourierField::from_modes(&[(1, c(0.5)), (-1, c(0.5))]);
        let samples = synthesize(&field, 16).unwrap();
        for (m, s) in samples.iter().enumerate() {
            let x = 2.0 * PI * m as f64 / 16.0;
            assert_abs_diff_eq!(s.re, x.cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(s.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn undersized_grid_is_an_aliasing_error() {
        let field = FourierField::zeros(Truncation::new(4).unwrap());
        assert!(matches!(
            synthesize(&field, 9),
            Err(Error::Aliasing { required: 10, .. })
        ));
        assert!(synthesize(&field, 10).is_ok());
    }

    #[test]
    fn diag_symbol_entries() {
        let trunc = Truncation::new(3).unwrap();
        let g = diag_symbol(|k| tanh_symbol(k, 1.0), 0.0, trunc);
        assert_abs_diff_eq!(g.entry(1, 1).re, 0.761_594_155_955_764_9, epsilon = 1e-15);
        assert_eq!(g.entry(0, 0).re, 0.0);
        let s = diag_symbol(|k| sech_symbol(k, 1.0), 0.0, trunc);
        assert_abs_diff_eq!(s.entry(2, 2).re, 2.0 / 2.0f64.cosh(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.entry(2, 2).re, 0.5316, epsilon = 5e-5);
        assert_eq!(g.entry(1, 0), c(0.0));
    }

    #[test]
    fn stable_sech_matches_naive_and_survives_large_arguments() {
        for z in [-3.0, -0.2, 0.0, 0.7, 5.0] {
            assert_abs_diff_eq!(stable_sech(z), 1.0 / f64::cosh(z), epsilon = 1e-15);
        }
        let big = sech_symbol(2000.0, 1.0);
        assert!(big.is_finite());
        assert_eq!(big, 0.0);
    }

    #[test]
    fn toeplitz_of_cosine_reads_coefficients() {
        let beta = FourierField::from_modes(&[(1, c(0.5)), (-1, c(0.5))]);
        let trunc = Truncation::new(4).unwrap();
        let b = toeplitz_mult(&beta, trunc);
        assert_eq!(b.entry(1, 0), c(0.5));
        assert_eq!(b.entry(0, 0), c(0.0));
        assert_eq!(b.entry(-4, -3), c(0.5));
        assert_eq!(b.entry(2, 0), c(0.0));
        let zero = toeplitz_mult(&FourierField::zeros(trunc), trunc);
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn diag_symbol_shift_identity() {
        let trunc = Truncation::new(5).unwrap();
        let theta = 0.3;
        let a = diag_symbol(|k| tanh_symbol(k, 0.8), theta, trunc);
        let b = diag_symbol(|k| tanh_symbol(k, 0.8), theta + 1.0, trunc);
        for j in -5..5 {
            assert_abs_diff_eq!(b.entry(j, j).re, a.entry(j + 1, j + 1).re, epsilon = 1e-14);
        }
    }
}
