//! Periodic bathymetry `y = -h + εβ(x)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{synthesize, FourierField};

const ZERO_MEAN_TOL: f64 = 1e-14;
const REALITY_TOL: f64 = 1e-12;
const MIN_CLEARANCE_SAMPLES: usize = 1024;

/// Named bottom shapes used throughout the examples and acceptance runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// `β = cos x`
    Cosx,
    /// `β = cos 2x`
    Cos2x,
    /// `β = cos x + cos 3x`
    Cos13,
}

impl Preset {
    pub fn beta(self) -> FourierField {
        let half = Complex64::new(0.5, 0.0);
        match self {
            Preset::Cosx => FourierField::from_modes(&[(-1, half), (1, half)]),
            Preset::Cos2x => FourierField::from_modes(&[(-2, half), (2, half)]),
            Preset::Cos13 => {
                FourierField::from_modes(&[(-3, half), (-1, half), (1, half), (3, half)])
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Cosx => "cosx",
            Preset::Cos2x => "cos2x",
            Preset::Cos13 => "cos13",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosx" => Ok(Preset::Cosx),
            "cos2x" => Ok(Preset::Cos2x),
            "cos13" => Ok(Preset::Cos13),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }
}

/// Mean depth `h`, zero-mean real shape `β`, amplitude `ε` and the clearance
/// bound `c0` that `h - εβ(x)` must respect everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct BathymetryProfile {
    depth: f64,
    beta: FourierField,
    eps: f64,
    clearance: f64,
}

impl BathymetryProfile {
    pub fn new(depth: f64, beta: FourierField, eps: f64, clearance: f64) -> Result<Self> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "depth h must be positive and finite, got {depth}"
            )));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::InvalidProfile(format!(
                "amplitude eps must be non-negative and finite, got {eps}"
            )));
        }
        if !(clearance.is_finite() && clearance > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "clearance c0 must be positive, got {clearance}"
            )));
        }
        if beta
            .coeffs()
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidProfile(
                "beta has non-finite coefficients".into(),
            ));
        }
        let scale = beta.max_abs().max(1.0);
        if beta.coeff(0).norm() > ZERO_MEAN_TOL * scale {
            return Err(Error::InvalidProfile(format!(
                "beta must have zero mean, but beta_0 = {}",
                beta.coeff(0)
            )));
        }
        if !beta.is_real_valued(REALITY_TOL) {
            return Err(Error::InvalidProfile(
                "beta must be real-valued: beta_{-k} = conj(beta_k) violated".into(),
            ));
        }
        let profile = Self {
            depth,
            beta,
            eps,
            clearance,
        };
        let min_depth = profile.min_fluid_depth();
        if min_depth < clearance {
            return Err(Error::InvalidProfile(format!(
                "clearance violated: min(h - eps*beta) = {min_depth:.6} < c0 = {clearance}"
            )));
        }
        Ok(profile)
    }

    /// Preset shape with clearance `c0 = h/100`.
    pub fn preset(preset: Preset, depth: f64, eps: f64) -> Result<Self> {
        Self::new(depth, preset.beta(), eps, 0.01 * depth)
    }

    pub fn flat(depth: f64) -> Result<Self> {
        Self::new(
            depth,
            FourierField::zeros(crate::fourier::Truncation::new(1)?),
            0.0,
            0.01 * depth,
        )
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn beta(&self) -> &FourierField {
        &self.beta
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    /// Same shape and depth at another amplitude, revalidated.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.depth, self.beta.clone(), eps, self.clearance)
    }

    /// Largest `|k|` with `β_k ≠ 0`.
    pub fn max_wavenumber(&self) -> usize {
        self.beta.max_mode()
    }

    pub fn is_flat(&self) -> bool {
        self.eps == 0.0 || self.beta.max_abs() == 0.0
    }

    /// `β(x)`, taking the real part of the synthesized series.
    pub fn beta_at(&self, x: f64) -> f64 {
        self.beta.evaluate(x).re
    }

    /// `β'(x)` and `β''(x)`.
    pub fn beta_derivatives_at(&self, x: f64) -> (f64, f64) {
        let mut first = Complex64::new(0.0, 0.0);
        let mut second = Complex64::new(0.0, 0.0);
        for k in self.beta.support() {
            let kf = k as f64;
            let wave = self.beta.coeff(k) * Complex64::from_polar(1.0, kf * x);
            first += wave * Complex64::new(0.0, kf);
            second += wave * (-kf * kf);
        }
        (first.re, second.re)
    }

    /// Local fluid depth `h - εβ(x)`.
    pub fn fluid_depth_at(&self, x: f64) -> f64 {
        self.depth - self.eps * self.beta_at(x)
    }

    fn min_fluid_depth(&self) -> f64 {
        let grid = MIN_CLEARANCE_SAMPLES.max(16 * (2 * self.beta.truncation().cutoff() + 1));
        let samples = synthesize(&self.beta, grid).expect("grid exceeds field bandwidth");
        samples
            .iter()
            .map(|b| self.depth - self.eps * b.re)
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn presets_validate() {
        for p in [Preset::Cosx, Preset::Cos2x, Preset::Cos13] {
            let prof = BathymetryProfile::preset(p, 1.0, 0.1).unwrap();
            assert_eq!(prof.beta().coeff(0), c(0.0));
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert_eq!(
            BathymetryProfile::preset(Preset::Cos13, 1.0, 0.1)
                .unwrap()
                .max_wavenumber(),
            3
        );
        assert!(matches!(
            "sawtooth".parse::<Preset>(),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn nonzero_mean_rejected() {
        let beta = FourierField::from_modes(&[(0, c(0.1)), (1, c(0.5)), (-1, c(0.5))]);
        let err = BathymetryProfile::new(1.0, beta, 0.1, 0.01).unwrap_err();
        assert!(err.to_string().contains("zero mean"));
    }

    #[test]
    fn complex_valued_shape_rejected() {
        let beta = FourierField::from_modes(&[(1, c(0.5))]);
        let err = BathymetryProfile::new(1.0, beta, 0.1, 0.01).unwrap_err();
        assert!(err.to_string().contains("real-valued"));
    }

    #[test]
    fn clearance_enforced() {
        // cos x + cos 3x peaks at 2, so eps = 0.5 touches h = 1.
        assert!(BathymetryProfile::preset(Preset::Cos13, 1.0, 0.5).is_err());
        assert!(BathymetryProfile::preset(Preset::Cos13, 1.0, 0.45).is_ok());
        assert!(BathymetryProfile::new(1.0, Preset::Cosx.beta(), 0.9, 0.2).is_err());
    }

    #[test]
    fn bad_scalars_rejected() {
        assert!(BathymetryProfile::preset(Preset::Cosx, 0.0, 0.1).is_err());
        assert!(BathymetryProfile::preset(Preset::Cosx, 1.0, -0.1).is_err());
        assert!(BathymetryProfile::new(1.0, Preset::Cosx.beta(), 0.1, 0.0).is_err());
    }

    #[test]
    fn derivatives_of_cosine() {
        let prof = BathymetryProfile::preset(Preset::Cosx, 1.0, 0.1).unwrap();
        let x = 0.7f64;
        let (d1, d2) = prof.beta_derivatives_at(x);
        assert!((prof.beta_at(x) - x.cos()).abs() < 1e-15);
        assert!((d1 + x.sin()).abs() < 1e-15);
        assert!((d2 + x.cos()).abs() < 1e-15);
        assert!((prof.fluid_depth_at(x) - (1.0 - 0.1 * x.cos())).abs() < 1e-15);
    }
}
