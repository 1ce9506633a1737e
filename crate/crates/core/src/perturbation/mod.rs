//! Perturbative analysis of band gaps: the generator recursion, effective
//! 2×2 matrices, closed-form coefficients and scaling fits.
//!
//! Gaps are numbered by band: gap `m` separates `Λ_{m-1}` from `Λ_m`. Even
//! gaps open at `θ = 0` between modes `±m/2`; odd gaps open at `θ = ±1/2`.

mod formulas;
mod recursion;
pub mod series;

pub use formulas::{
    analytic_gap_formula, cosx_gap2_full, fit_gap_scaling, gap_opening_predicate,
    second_order_coefficients, GapFormula, ScalingFit, SecondOrderCoefficients,
};
pub use recursion::{
    effective_matrix_a, effective_matrix_generic, gap_from_a, off_block_residual,
    solve_t_recursion, EffectiveMatrix, GapSplit, PerturbationData, MAX_EFFECTIVE_ORDER,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-width of the window around the crossing where the pair stays
/// separated from every other mode.
pub const VALIDITY_RADIUS: f64 = 3.0 / 16.0;

/// The two Fourier modes whose symbols collide at the crossing of gap `m`.
///
/// `upper` is the mode with the larger wavenumber; at the crossing the
/// wavenumbers `upper + θ*` and `lower + θ*` are `±m/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModePair {
    pub gap: usize,
    pub upper: i64,
    pub lower: i64,
}

impl ModePair {
    /// Crossing point: `0` for even gaps, `-1/2` or `+1/2` for odd gaps
    /// (the one on the same side as `theta`).
    pub fn crossing(gap: usize, theta: f64) -> f64 {
        if gap.is_multiple_of(2) {
            0.0
        } else if theta > 0.0 {
            0.5
        } else {
            -0.5
        }
    }

    /// Pair for gap `m` at `theta`, which must lie within `3/16` of the
    /// crossing.
    pub fn for_gap(gap: usize, theta: f64) -> Result<Self> {
        if gap == 0 {
            return Err(Error::OutsideValidityRegion { theta, gap });
        }
        let star = Self::crossing(gap, theta);
        if !((theta - star).abs() < VALIDITY_RADIUS) {
            return Err(Error::OutsideValidityRegion { theta, gap });
        }
        let m = gap as i64;
        let (upper, lower) = if gap.is_multiple_of(2) {
            (m / 2, -m / 2)
        } else if star < 0.0 {
            ((m + 1) / 2, -(m - 1) / 2)
        } else {
            ((m - 1) / 2, -(m + 1) / 2)
        };
        Ok(Self { gap, upper, lower })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::tanh_symbol;

    #[test]
    fn pairs_collide_at_crossing() {
        for gap in 1..=7usize {
            for theta in [-0.45, 0.0, 0.1, 0.4] {
                let Ok(pair) = ModePair::for_gap(gap, theta) else {
                    continue;
                };
                let star = ModePair::crossing(gap, theta);
                let ku = pair.upper as f64 + star;
                let kl = pair.lower as f64 + star;
                assert_eq!(ku, gap as f64 / 2.0);
                assert_eq!(kl, -(gap as f64) / 2.0);
                assert_eq!(pair.upper - pair.lower, gap as i64);
                assert!((tanh_symbol(ku, 1.0) - tanh_symbol(kl, 1.0)).abs() < 1e-15);
            }
        }
        assert_eq!(
            ModePair::for_gap(2, 0.0).unwrap(),
            ModePair {
                gap: 2,
                upper: 1,
                lower: -1
            }
        );
        assert_eq!(
            ModePair::for_gap(1, -0.4).unwrap(),
            ModePair {
                gap: 1,
                upper: 1,
                lower: 0
            }
        );
    }

    #[test]
    fn validity_windows() {
        assert!(ModePair::for_gap(2, 0.18).is_ok());
        assert!(ModePair::for_gap(2, 0.19).is_err());
        assert!(ModePair::for_gap(3, -0.32).is_ok());
        assert!(ModePair::for_gap(3, -0.3).is_err());
        assert!(ModePair::for_gap(3, 0.5).is_ok());
        assert!(ModePair::for_gap(0, 0.0).is_err());
    }
}
