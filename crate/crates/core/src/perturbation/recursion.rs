//! Order-by-order block diagonalization `e^{-T} G_θ e^{T}` around a pair of
//! colliding modes, and the resulting effective 2×2 matrices.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::series::{commutator, conjugated, Mat};
use super::ModePair;
use crate::dno::DnoSeries;
use crate::error::{Error, Result};
use crate::fourier::Truncation;
use crate::matrix::OperatorMatrix;

const DIVISOR_FLOOR: f64 = 1e-8;
/// Highest order with a hand-reduced effective matrix.
pub const MAX_EFFECTIVE_ORDER: usize = 4;

/// Generator terms `T_1..T_{q_max}` for one gap at one `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationData {
    pub pair: ModePair,
    pub theta: f64,
    pub q_max: usize,
    /// `t_terms[p - 1] = T_p`.
    pub t_terms: Vec<OperatorMatrix>,
}

impl PerturbationData {
    pub fn gap(&self) -> usize {
        self.pair.gap
    }

    pub fn t(&self, p: usize) -> Option<&OperatorMatrix> {
        p.checked_sub(1).and_then(|i| self.t_terms.get(i))
    }

    /// Largest entry of any `T_p` outside the rows and columns of the pair.
    pub fn support_defect(&self) -> f64 {
        let pair = [self.pair.upper, self.pair.lower];
        let mut worst = 0.0f64;
        for t in &self.t_terms {
            let trunc = t.truncation();
            for j in trunc.modes() {
                for l in trunc.modes() {
                    let inside = pair.contains(&j) != pair.contains(&l);
                    if !inside {
                        worst = worst.max(t.entry(j, l).norm());
                    }
                }
            }
        }
        worst
    }
}

/// `|g_a - g_l| >= 1e-8·⟨l - a⟩` for both pair modes `a` and every other `l`.
fn check_divisors(g: &[f64], trunc: Truncation, pair: &ModePair) -> Result<()> {
    let pair_modes = [pair.upper, pair.lower];
    for &a in &pair_modes {
        let ia = trunc.index(a).expect("pair inside truncation");
        for (il, l) in trunc.modes().enumerate() {
            if pair_modes.contains(&l) {
                continue;
            }
            let divisor = (g[ia] - g[il]).abs();
            let floor = DIVISOR_FLOOR * (1.0 + ((l - a) as f64).powi(2)).sqrt();
            if !(divisor >= floor) {
                return Err(Error::SmallDivisor {
                    mode: l,
                    divisor,
                    floor,
                });
            }
        }
    }
    Ok(())
}

fn hamiltonian_terms(series: &DnoSeries) -> Vec<Mat> {
    let mut h = vec![series.flat_part().into_matrix()];
    h.extend(series.terms().iter().map(|m| m.as_matrix().clone()));
    h
}

/// Solve for `T_1..T_{q_max}` so that the rows of the colliding pair decouple
/// from the rest of the spectrum through order `q_max`.
///
/// At order `q`, with `N_q` the `ε^q` coefficient of `e^{-T} G_θ e^{T}` built
/// from `T_1..T_{q-1}`, `(T_q)_{al} = -(N_q)_{al} / (g_a - g_l)` for `a` in
/// the pair and `l` outside, completed anti-Hermitian.
pub fn solve_t_recursion(series: &DnoSeries, gap: usize, q_max: usize) -> Result<PerturbationData> {
    if q_max == 0 || q_max > series.order() {
        return Err(Error::OrderMismatch {
            requested: q_max,
            available: series.order(),
        });
    }
    let theta = series.theta();
    let pair = ModePair::for_gap(gap, theta)?;
    let trunc = series.truncation();
    let (ia, ib) = match (trunc.index(pair.upper), trunc.index(pair.lower)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::InsufficientTruncation {
                got: trunc.cutoff(),
                bands: gap + 1,
                required: pair.upper.unsigned_abs().max(pair.lower.unsigned_abs()) as usize,
            })
        }
    };
    let dim = trunc.dim();
    let g: Vec<f64> = trunc.modes().map(|j| series.g(j)).collect();

    check_divisors(&g, trunc, &pair)?;

    let h = hamiltonian_terms(series);
    let mut t: Vec<Mat> = Vec::with_capacity(q_max);
    for q in 1..=q_max {
        let n_q = &conjugated(&h, &t, q)[q];
        let mut t_q = Mat::zeros(dim, dim);
        for &a in &[ia, ib] {
            for l in 0..dim {
                if l == ia || l == ib {
                    continue;
                }
                let value = -n_q[(a, l)] / (g[a] - g[l]);
                t_q[(a, l)] = value;
                t_q[(l, a)] = -value.conj();
            }
        }
        t.push(t_q);
    }
    let t_terms = t
        .into_iter()
        .map(|m| OperatorMatrix::from_matrix(trunc, m).expect("square"))
        .collect();
    Ok(PerturbationData {
        pair,
        theta,
        q_max,
        t_terms,
    })
}

/// `A(θ, ε) = Σ_p ε^p A_p` restricted to the pair, row/column 0 being the
/// upper mode and 1 the lower one.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveMatrix {
    pub pair: ModePair,
    /// `terms[p] = A_p`, starting from `A_0 = diag(g_upper, g_lower)`.
    pub terms: Vec<Matrix2<Complex64>>,
}

impl EffectiveMatrix {
    pub fn order(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn sum(&self, eps: f64) -> Matrix2<Complex64> {
        self.sum_through(eps, self.order())
    }

    pub fn sum_through(&self, eps: f64, order: usize) -> Matrix2<Complex64> {
        self.terms
            .iter()
            .take(order + 1)
            .enumerate()
            .fold(Matrix2::zeros(), |acc, (p, a)| {
                acc + a * Complex64::new(eps.powi(p as i32), 0.0)
            })
    }
}

fn project(m: &Mat, ia: usize, ib: usize) -> Matrix2<Complex64> {
    Matrix2::new(m[(ia, ia)], m[(ia, ib)], m[(ib, ia)], m[(ib, ib)])
}

fn pair_indices(data: &PerturbationData, series: &DnoSeries) -> (usize, usize) {
    let trunc = series.truncation();
    (
        trunc
            .index(data.pair.upper)
            .expect("pair inside truncation"),
        trunc
            .index(data.pair.lower)
            .expect("pair inside truncation"),
    )
}

fn available_order(
    data: &PerturbationData,
    series: &DnoSeries,
    order: usize,
    cap: usize,
) -> Result<()> {
    let available = series.order().min(data.q_max + 1).min(cap);
    if order > available {
        return Err(Error::OrderMismatch {
            requested: order,
            available,
        });
    }
    Ok(())
}

/// Reduced commutator formulas for `A_1..A_4`.
pub fn effective_matrix_a(
    data: &PerturbationData,
    series: &DnoSeries,
    order: usize,
) -> Result<EffectiveMatrix> {
    available_order(data, series, order, MAX_EFFECTIVE_ORDER)?;
    let (ia, ib) = pair_indices(data, series);
    let h = hamiltonian_terms(series);
    let g = &h[0];
    let m = |p: usize| &h[p];
    let t = |p: usize| data.t_terms[p - 1].as_matrix();
    let c = commutator;
    let half = Complex64::new(0.5, 0.0);

    let mut terms = vec![project(g, ia, ib)];
    if order >= 1 {
        terms.push(project(m(1), ia, ib));
    }
    if order >= 2 {
        let a2 = c(t(1), &c(t(1), g)) * half + m(2) + c(m(1), t(1));
        terms.push(project(&a2, ia, ib));
    }
    if order >= 3 {
        let a3 = (c(t(1), &c(t(2), g)) + c(t(2), &c(t(1), g))) * half
            + m(3)
            + c(m(2), t(1))
            + c(m(1), t(2))
            + c(t(1), &c(t(1), m(1))) * half;
        terms.push(project(&a3, ia, ib));
    }
    if order >= 4 {
        let a4 = m(4) - (c(t(1), m(3)) + c(t(2), m(2)) + c(t(3), m(1))) * half
            + c(t(1), &c(t(1), &c(t(1), m(1)))) * Complex64::new(1.0 / 24.0, 0.0);
        terms.push(project(&a4, ia, ib));
    }
    Ok(EffectiveMatrix {
        pair: data.pair,
        terms,
    })
}

/// `A_p` read directly off the `ε^p` coefficient of `P e^{-T} G_θ e^{T} P`.
pub fn effective_matrix_generic(
    data: &PerturbationData,
    series: &DnoSeries,
    order: usize,
) -> Result<EffectiveMatrix> {
    available_order(data, series, order, series.order())?;
    let (ia, ib) = pair_indices(data, series);
    let h = hamiltonian_terms(series);
    let t: Vec<Mat> = data.t_terms.iter().map(|m| m.as_matrix().clone()).collect();
    let coeffs = conjugated(&h, &t, order);
    Ok(EffectiveMatrix {
        pair: data.pair,
        terms: coeffs.iter().map(|m| project(m, ia, ib)).collect(),
    })
}

/// Largest entry of the pair rows of `e^{-T} H(ε) e^{T}` outside the pair
/// columns, with `T = Σ ε^p T_p` and `H(ε) = G_θ + Σ ε^p M_p`, both
/// exponentials evaluated in full.
pub fn off_block_residual(data: &PerturbationData, series: &DnoSeries, eps: f64) -> f64 {
    let (ia, ib) = pair_indices(data, series);
    let h = series.assemble(eps).into_matrix();
    let dim = h.nrows();
    let mut t = Mat::zeros(dim, dim);
    for (p, tp) in data.t_terms.iter().enumerate() {
        t += tp.as_matrix() * Complex64::new(eps.powi(p as i32 + 1), 0.0);
    }
    let plus = t.clone().exp();
    let minus = (-t).exp();
    let conj = minus * h * plus;
    let mut worst = 0.0f64;
    for &a in &[ia, ib] {
        for l in 0..dim {
            if l != ia && l != ib {
                worst = worst.max(conj[(a, l)].norm()).max(conj[(l, a)].norm());
            }
        }
    }
    worst
}

/// Eigenvalues of a Hermitian 2×2 matrix and their separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSplit {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

pub fn gap_from_a(a: &Matrix2<Complex64>) -> GapSplit {
    let p = a[(0, 0)].re;
    let q = a[(1, 1)].re;
    let c = 0.5 * (a[(0, 1)] + a[(1, 0)].conj());
    let mean = 0.5 * (p + q);
    let radius = (0.25 * (p - q) * (p - q) + c.norm_sqr()).sqrt();
    GapSplit {
        lower: mean - radius,
        upper: mean + radius,
        width: 2.0 * radius,
    }
}
