//! Truncated power series in `ε` with matrix coefficients.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Mat = DMatrix<Complex64>;

/// Ordered compositions of `total` into exactly `parts` positive integers.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(parts);
    fill(total, parts, &mut current, &mut out);
    out
}

fn fill(rest: usize, parts: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 0 {
        if rest == 0 {
            out.push(current.clone());
        }
        return;
    }
    if rest < parts {
        return;
    }
    for first in 1..=rest - (parts - 1) {
        current.push(first);
        fill(rest - first, parts - 1, current, out);
        current.pop();
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Coefficients `0..=order` of `exp(sign · Σ_p ε^p T_p)`.
///
/// `terms[p - 1]` holds `T_p`; missing orders count as zero.
pub fn exp_series(terms: &[Mat], sign: f64, order: usize, dim: usize) -> Vec<Mat> {
    let mut out = vec![Mat::zeros(dim, dim); order + 1];
    out[0] = Mat::identity(dim, dim);
    for (s, slot) in out.iter_mut().enumerate().skip(1) {
        for j in 1..=s {
            let weight = Complex64::new(sign.powi(j as i32) / factorial(j), 0.0);
            for comp in compositions(s, j) {
                if comp.iter().any(|&p| p > terms.len()) {
                    continue;
                }
                let mut product = Mat::identity(dim, dim);
                for &p in &comp {
                    product *= &terms[p - 1];
                }
                *slot += product * weight;
            }
        }
    }
    out
}

/// Cauchy product of two series through `order`.
pub fn mul_series(a: &[Mat], b: &[Mat], order: usize) -> Vec<Mat> {
    (0..=order)
        .map(|s| {
            let dim = a[0].nrows();
            let mut acc = Mat::zeros(dim, dim);
            for i in 0..=s {
                if i < a.len() && s - i < b.len() {
                    acc += &a[i] * &b[s - i];
                }
            }
            acc
        })
        .collect()
}

/// Coefficients of `e^{-T} H e^{T}` through `order`.
pub fn conjugated(h: &[Mat], t: &[Mat], order: usize) -> Vec<Mat> {
    let dim = h[0].nrows();
    let minus = exp_series(t, -1.0, order, dim);
    let plus = exp_series(t, 1.0, order, dim);
    mul_series(&mul_series(&minus, h, order), &plus, order)
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}
