//! Taylor expansion of the conjugated Dirichlet–Neumann operator
//! `G_θ[εβ] = G_θ[0] + Σ_p ε^p M_p` in the truncated Fourier basis.
//!
//! Each `M_p` is `S X_p S` with `S = D sech(hD)` and `X_p` a signed sum of
//! words in three letters: multiplication by `β`, `G = D tanh(hD)` and `D²`.
//! Symbols are evaluated at the shifted wavenumbers `j + θ`.
//!
//! Words are applied to the identity on a window widened by `p·K` modes
//! (`K` the largest wavenumber of `β`) and then cropped, so every entry of the
//! returned `M_p` is exact: no intermediate mode of a `p`-letter product can
//! leave the widened window.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{sech_symbol, tanh_symbol, FourierField, Truncation};
use crate::matrix::OperatorMatrix;
use crate::profile::BathymetryProfile;

pub const MAX_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Letter {
    Beta,
    Tanh,
    Square,
}

use Letter::{Beta as B, Square as D2, Tanh as G};

/// `(coefficient, word)` pairs of `X_p`, words read left to right.
fn words(order: usize) -> &'static [(f64, &'static [Letter])] {
    const X1: &[(f64, &[Letter])] = &[(-1.0, &[B])];
    const X2: &[(f64, &[Letter])] = &[(-1.0, &[B, G, B])];
    const X3: &[(f64, &[Letter])] = &[
        (-1.0 / 6.0, &[B, B, B, D2]),
        (0.5, &[B, B, D2, B]),
        (-1.0, &[B, G, B, G, B]),
    ];
    const X4: &[(f64, &[Letter])] = &[
        (-1.0, &[B, G, B, G, B, G, B]),
        (-1.0 / 6.0, &[B, G, B, B, B, D2]),
        (0.5, &[B, G, B, B, D2, B]),
        (-1.0 / 6.0, &[B, B, B, D2, G, B]),
        (0.5, &[B, B, D2, B, G, B]),
    ];
    match order {
        1 => X1,
        2 => X2,
        3 => X3,
        4 => X4,
        _ => &[],
    }
}

/// `Σ_p ε^p M_p` data at one Bloch parameter.
#[derive(Debug, Clone)]
pub struct DnoSeries {
    order: usize,
    terms: Vec<OperatorMatrix>,
    theta: f64,
    trunc: Truncation,
    depth: f64,
    eps: f64,
    support: Vec<i64>,
}

impl DnoSeries {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `M_p` for `1 <= p <= order`.
    pub fn term(&self, p: usize) -> Option<&OperatorMatrix> {
        p.checked_sub(1).and_then(|i| self.terms.get(i))
    }

    pub fn terms(&self) -> &[OperatorMatrix] {
        &self.terms
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    /// Amplitude of the profile the series was built from.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Fourier support of `β`.
    pub fn support(&self) -> &[i64] {
        &self.support
    }

    /// Unperturbed symbol `g_j(θ) = (j+θ) tanh(h(j+θ))`.
    pub fn g(&self, mode: i64) -> f64 {
        tanh_symbol(mode as f64 + self.theta, self.depth)
    }

    /// Coupling symbol `s_j(θ) = (j+θ) sech(h(j+θ))`.
    pub fn s(&self, mode: i64) -> f64 {
        sech_symbol(mode as f64 + self.theta, self.depth)
    }

    /// Diagonal matrix `G_θ[0]`.
    pub fn flat_part(&self) -> OperatorMatrix {
        let values: Vec<Complex64> = self
            .trunc
            .modes()
            .map(|j| Complex64::new(self.g(j), 0.0))
            .collect();
        OperatorMatrix::from_diagonal(self.trunc, &values)
    }

    /// `G_θ[0] + Σ_{p <= order} ε^p M_p` at an arbitrary amplitude.
    pub fn assemble(&self, eps: f64) -> OperatorMatrix {
        let mut out = self.flat_part();
        if eps == 0.0 {
            return out;
        }
        let mut power = 1.0;
        for m in &self.terms {
            power *= eps;
            *out.as_matrix_mut() += m.as_matrix() * Complex64::new(power, 0.0);
        }
        out
    }
}

fn apply_letter(
    letter: Letter,
    beta: &FourierField,
    support: &[i64],
    shifted: &[f64],
    depth: f64,
    x: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let dim = x.nrows();
    match letter {
        Letter::Beta => {
            let mut y = DMatrix::zeros(dim, x.ncols());
            for &k in support {
                let bk = beta.coeff(k);
                for r in 0..dim {
                    let src = r as i64 - k;
                    if src < 0 || src >= dim as i64 {
                        continue;
                    }
                    let src = src as usize;
                    for c in 0..x.ncols() {
                        y[(r, c)] += bk * x[(src, c)];
                    }
                }
            }
            y
        }
        Letter::Tanh | Letter::Square => {
            let mut y = x.clone();
            for (r, &k) in shifted.iter().enumerate() {
                let w = match letter {
                    Letter::Tanh => tanh_symbol(k, depth),
                    _ => k * k,
                };
                y.row_mut(r).scale_mut(w);
            }
            y
        }
    }
}

fn build_term(
    order: usize,
    beta: &FourierField,
    support: &[i64],
    depth: f64,
    theta: f64,
    trunc: Truncation,
) -> OperatorMatrix {
    let reach = support
        .iter()
        .map(|k| k.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let wide = trunc.widened(order * reach);
    let shifted: Vec<f64> = wide.modes().map(|j| j as f64 + theta).collect();
    let dim = wide.dim();

    let mut inner = DMatrix::<Complex64>::zeros(dim, dim);
    for &(coef, word) in words(order) {
        let mut x = DMatrix::<Complex64>::identity(dim, dim);
        for &letter in word.iter().rev() {
            x = apply_letter(letter, beta, support, &shifted, depth, &x);
        }
        inner += x * Complex64::new(coef, 0.0);
    }
    for (i, &k) in shifted.iter().enumerate() {
        let s = sech_symbol(k, depth);
        inner.row_mut(i).scale_mut(s);
        inner.column_mut(i).scale_mut(s);
    }
    OperatorMatrix::from_matrix(wide, inner)
        .expect("square by construction")
        .cropped(trunc)
}

/// Taylor terms `M_1..M_order` of the topography correction (no `ε` factors).
pub fn build_m_terms(
    profile: &BathymetryProfile,
    theta: f64,
    trunc: Truncation,
    order: usize,
) -> Result<DnoSeries> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let beta = profile.beta();
    let support = beta.support();
    let terms = (1..=order)
        .map(|p| {
            if support.is_empty() {
                OperatorMatrix::zeros(trunc)
            } else {
                build_term(p, beta, &support, profile.depth(), theta, trunc)
            }
        })
        .collect();
    Ok(DnoSeries {
        order,
        terms,
        theta,
        trunc,
        depth: profile.depth(),
        eps: profile.eps(),
        support,
    })
}

/// Truncated matrix of `G_θ[εβ]` through `ε^order`.
pub fn assemble_g_theta(
    profile: &BathymetryProfile,
    theta: f64,
    trunc: Truncation,
    order: usize,
) -> Result<OperatorMatrix> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    if profile.is_flat() {
        let series = DnoSeries {
            order,
            terms: Vec::new(),
            theta,
            trunc,
            depth: profile.depth(),
            eps: profile.eps(),
            support: Vec::new(),
        };
        return Ok(series.flat_part());
    }
    Ok(build_m_terms(profile, theta, trunc, order)?.assemble(profile.eps()))
}

/// All sums of exactly `p` wavenumbers drawn (with repetition) from `support`.
pub fn reachable_differences(support: &[i64], p: usize) -> std::collections::BTreeSet<i64> {
    let mut current: std::collections::BTreeSet<i64> = [0].into_iter().collect();
    for _ in 0..p {
        current = current
            .iter()
            .flat_map(|s| support.iter().map(move |k| s + k))
            .collect();
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Preset;
    use approx::assert_abs_diff_eq;

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn first_term_entries_for_cosine() {
        let prof = BathymetryProfile::preset(Preset::Cosx, 1.0, 0.1).unwrap();
        let trunc = Truncation::new(6).unwrap();
        let s = build_m_terms(&prof, 0.0, trunc, 1).unwrap();
        let m1 = s.term(1).unwrap();
        assert_eq!(m1.entry(1, 0).norm(), 0.0);
        let expected = -(2.0 * sech(2.0)) * sech(1.0) * 0.5;
        assert_abs_diff_eq!(m1.entry(2, 1).re, expected, epsilon = 1e-15);
        assert_abs_diff_eq!(m1.entry(2, 1).re, -0.1723, epsilon = 5e-5);
    }

    #[test]
    fn first_term_matches_closed_form_everywhere() {
        let beta = FourierField::from_modes(&[
            (-2, Complex64::new(0.1, 0.3)),
            (-1, Complex64::new(0.4, -0.2)),
            (1, Complex64::new(0.4, 0.2)),
            (2, Complex64::new(0.1, -0.3)),
        ]);
        let prof = BathymetryProfile::new(1.3, beta.clone(), 0.05, 0.01).unwrap();
        let trunc = Truncation::new(5).unwrap();
        let s = build_m_terms(&prof, 0.27, trunc, 1).unwrap();
        for j in trunc.modes() {
            for l in trunc.modes() {
                let expected = -s.s(j) * s.s(l) * beta.coeff(j - l);
                assert!((s.term(1).unwrap().entry(j, l) - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn second_term_matches_convolution_formula() {
        let prof = BathymetryProfile::preset(Preset::Cos13, 0.8, 0.05).unwrap();
        let trunc = Truncation::new(6).unwrap();
        let s = build_m_terms(&prof, -0.11, trunc, 2).unwrap();
        let beta = prof.beta();
        for j in trunc.modes() {
            for k in trunc.modes() {
                let sum: Complex64 = (-12..=12)
                    .map(|p| beta.coeff(j - k - p) * s.g(k + p) * beta.coeff(p))
                    .sum();
                let expected = -s.s(j) * s.s(k) * sum;
                assert!((s.term(2).unwrap().entry(j, k) - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn fourth_term_double_point_entry() {
        let prof = BathymetryProfile::preset(Preset::Cosx, 1.0, 0.1).unwrap();
        let s = build_m_terms(&prof, 0.0, Truncation::new(8).unwrap(), 4).unwrap();
        let expected = s.s(1).powi(2) * s.g(2) / 48.0;
        assert_abs_diff_eq!(
            s.term(4).unwrap().entry(1, -1).re,
            expected,
            epsilon = 1e-15
        );
    }

    #[test]
    fn every_term_is_hermitian() {
        let beta = FourierField::from_modes(&[
            (-3, Complex64::new(0.05, -0.1)),
            (-1, Complex64::new(0.3, 0.2)),
            (1, Complex64::new(0.3, -0.2)),
            (3, Complex64::new(0.05, 0.1)),
        ]);
        let prof = BathymetryProfile::new(1.0, beta, 0.1, 0.01).unwrap();
        let s = build_m_terms(&prof, 0.3, Truncation::new(10).unwrap(), 4).unwrap();
        for m in s.terms() {
            assert!(m.is_hermitian(1e-12), "defect {}", m.hermiticity_defect());
        }
    }

    #[test]
    fn order_out_of_range() {
        let prof = BathymetryProfile::preset(Preset::Cosx, 1.0, 0.1).unwrap();
        let trunc = Truncation::new(4).unwrap();
        assert_eq!(
            build_m_terms(&prof, 0.0, trunc, 5).unwrap_err(),
            Error::UnsupportedOrder(5)
        );
        assert!(assemble_g_theta(&prof, 0.0, trunc, 0).is_err());
    }

    #[test]
    fn flat_profile_short_circuits_to_dispersion() {
        let prof = BathymetryProfile::preset(Preset::Cosx, 1.0, 0.0).unwrap();
        let trunc = Truncation::new(4).unwrap();
        let g = assemble_g_theta(&prof, 0.2, trunc, 4).unwrap();
        for j in trunc.modes() {
            for l in trunc.modes() {
                let expected = if j == l {
                    tanh_symbol(j as f64 + 0.2, 1.0)
                } else {
                    0.0
                };
                assert_eq!(g.entry(j, l).re, expected);
                assert_eq!(g.entry(j, l).im, 0.0);
            }
        }
    }

    #[test]
    fn zero_row_and_column_at_theta_zero() {
        let prof = BathymetryProfile::preset(Preset::Cos13, 1.0, 0.1).unwrap();
        let trunc = Truncation::new(8).unwrap();
        let g = assemble_g_theta(&prof, 0.0, trunc, 4).unwrap();
        for l in trunc.modes() {
            assert_eq!(g.entry(0, l).norm(), 0.0);
            assert_eq!(g.entry(l, 0).norm(), 0.0);
        }
    }

    #[test]
    fn reachable_sums() {
        let s = reachable_differences(&[-1, 1], 2);
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![-2, 0, 2]);
        let s = reachable_differences(&[-3, -1, 1, 3], 2);
        assert!(s.contains(&2) && s.contains(&6) && !s.contains(&1));
    }
}
