//! Closed-form gap coefficients, scaling fits and the composition test for
//! whether a gap can open at a given order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ModePair;
use crate::dno::reachable_differences;
use crate::error::{Error, Result};
use crate::fourier::{sech_symbol, tanh_symbol};
use crate::profile::BathymetryProfile;

const CLOSED_WIDTH: f64 = 1e-10;

/// `a_{x,y}` for `x, y` in the colliding pair: the `ε²` entries of the
/// effective matrix, summed exactly over the support of `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderCoefficients {
    pub pair: ModePair,
    /// `a_{upper,upper}`
    pub upper: Complex64,
    /// `a_{lower,lower}`
    pub lower: Complex64,
    /// `a_{upper,lower}`; `a_{lower,upper}` is its conjugate.
    pub off_diagonal: Complex64,
}

/// `a_{xy} = -s_x s_y Σ_l β_{x-l} β_{l-y} [g_l - ½ s_l² (1/(g_x - g_l) + 1/(g_y - g_l))]`,
/// the bracketed correction only for `l` outside the pair.
pub fn second_order_coefficients(
    profile: &BathymetryProfile,
    gap: usize,
    theta: f64,
) -> Result<SecondOrderCoefficients> {
    let pair = ModePair::for_gap(gap, theta)?;
    let h = profile.depth();
    let beta = profile.beta();
    let support = beta.support();
    let g = |j: i64| tanh_symbol(j as f64 + theta, h);
    let s = |j: i64| sech_symbol(j as f64 + theta, h);
    let entry = |x: i64, y: i64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &k in &support {
            let l = x - k;
            let right = beta.coeff(l - y);
            if right.norm() == 0.0 {
                continue;
            }
            let mut bracket = g(l);
            if l != pair.upper && l != pair.lower {
                bracket -= 0.5 * s(l) * s(l) * (1.0 / (g(x) - g(l)) + 1.0 / (g(y) - g(l)));
            }
            acc += beta.coeff(k) * right * bracket;
        }
        acc * (-s(x) * s(y))
    };
    Ok(SecondOrderCoefficients {
        pair,
        upper: entry(pair.upper, pair.upper),
        lower: entry(pair.lower, pair.lower),
        off_diagonal: entry(pair.upper, pair.lower),
    })
}

/// Closed-form predictions for the worked bathymetries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapFormula {
    /// First gap for `β = cos x`: `¼ sech²(h/2) ε`.
    CosxGap1,
    /// Second gap for `β = cos x`: `(1/12) sech²(h) tanh(2h) ε⁴`.
    CosxGap2,
    /// Shift of the first gap's centre from `g_0(1/2)` for `β = cos x`.
    CosxCenterShift,
    /// Second gap for `β = cos x + cos 3x`, order `ε²`.
    Cos13Gap2,
}

impl GapFormula {
    pub const ALL: [GapFormula; 4] = [
        GapFormula::CosxGap1,
        GapFormula::CosxGap2,
        GapFormula::CosxCenterShift,
        GapFormula::Cos13Gap2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GapFormula::CosxGap1 => "cosx_gap1",
            GapFormula::CosxGap2 => "cosx_gap2",
            GapFormula::CosxCenterShift => "cosx_center_shift",
            GapFormula::Cos13Gap2 => "cos13_gap2",
        }
    }
}

impl fmt::Display for GapFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GapFormula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

fn check_scalars(h: f64, eps: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidProfile(format!(
            "depth must be positive, got {h}"
        )));
    }
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidProfile(format!(
            "eps must be non-negative, got {eps}"
        )));
    }
    Ok(())
}

pub fn analytic_gap_formula(formula: GapFormula, h: f64, eps: f64) -> Result<f64> {
    check_scalars(h, eps)?;
    let sech2 = |x: f64| 1.0 / x.cosh().powi(2);
    Ok(match formula {
        GapFormula::CosxGap1 => 0.25 * sech2(0.5 * h) * eps,
        GapFormula::CosxGap2 => sech2(h) * (2.0 * h).tanh() / 12.0 * eps.powi(4),
        GapFormula::CosxCenterShift => {
            let g0 = tanh_symbol(0.5, h);
            let g1 = tanh_symbol(1.5, h);
            let s0 = sech_symbol(0.5, h);
            -0.25 * s0 * s0 * (g0 * g0 - 2.25) / (g0 - g1) * eps * eps
        }
        GapFormula::Cos13Gap2 => {
            let (t1, t2) = (h.tanh(), (2.0 * h).tanh());
            sech2(h) * (4.0 - 2.0 * t1 * t2).abs() / (t1 - 2.0 * t2).abs() * eps * eps
        }
    })
}

/// Second gap for `β = cos x` with the complete fourth-order block:
/// `2ε⁴ (s_1²/48)(g_2 + s_2²/(g_2 - g_1))`, symbols at `θ = 0`.
pub fn cosx_gap2_full(h: f64, eps: f64) -> Result<f64> {
    check_scalars(h, eps)?;
    let (g1, g2) = (tanh_symbol(1.0, h), tanh_symbol(2.0, h));
    let (s1, s2) = (sech_symbol(1.0, h), sech_symbol(2.0, h));
    Ok(2.0 * eps.powi(4) * s1 * s1 / 48.0 * (g2 + s2 * s2 / (g2 - g1)))
}

/// `width ≈ coefficient · ε^exponent` by least squares in log–log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// Root-mean-square deviation of `log width` from the fitted line.
    pub residual: f64,
}

pub fn fit_gap_scaling(eps: &[f64], widths: &[f64]) -> Result<ScalingFit> {
    if eps.len() != widths.len() {
        return Err(Error::DimensionMismatch {
            expected: eps.len(),
            got: widths.len(),
        });
    }
    if eps.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 points, got {}",
            eps.len()
        )));
    }
    if eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InsufficientData(
            "eps values must be positive".into(),
        ));
    }
    if widths.iter().any(|w| !(w.is_finite() && *w > CLOSED_WIDTH)) {
        return Err(Error::ClosedGap);
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = widths.iter().map(|w| w.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(
            "eps values must not all coincide".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(ScalingFit {
        exponent: slope,
        coefficient: intercept.exp(),
        residual,
    })
}

/// Whether gap `m` may open at some order `≤ q`: the pair modes differ by
/// `m`, so some sum of at most `q` wavenumbers from the support must reach
/// `m`. Necessary, not sufficient.
pub fn gap_opening_predicate(support: &[i64], gap: usize, q: usize) -> bool {
    let target = gap as i64;
    let parts: Vec<i64> = support.iter().copied().filter(|&k| k != 0).collect();
    (1..=q).any(|p| reachable_differences(&parts, p).contains(&target))
}
