//! Independent referee for the Taylor series: solve Laplace's equation in the
//! fluid strip `-h + εβ(x) < y < 0` directly and read off the normal
//! derivative at the surface.
//!
//! The strip is flattened with the terrain-following map `y = ζ d(x)`,
//! `d = h - εβ`, `ζ ∈ [-1, 0]`. For the Bloch-conjugated unknown
//! `u = e^{-iθx} φ`, with `∂ = ∂_x + iθ`, the equation becomes
//!
//! ```text
//! d² ∂²u - 2ζ d d' ∂u_ζ + (1 + ζ² d'²) u_ζζ + ζ (2d'² - d d'') u_ζ = 0
//! ```
//!
//! with `u = ψ` at `ζ = 0`, `d d' ∂u + (1 + d'²) u_ζ = 0` at `ζ = -1`, and
//! `G_θ ψ = u_ζ(·, 0) / d`. Discretized by Fourier collocation in `x` and
//! Chebyshev collocation in `ζ`, solved densely.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{analyze, synthesize, FourierField};
use crate::profile::BathymetryProfile;

pub const MIN_NX: usize = 9;
pub const MIN_NZ: usize = 8;
const RESIDUAL_TOL: f64 = 1e-8;

/// Collocation grid: `nx` (odd) points per period, `nz + 1` Chebyshev levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResolution {
    pub nx: usize,
    pub nz: usize,
}

impl Default for OracleResolution {
    fn default() -> Self {
        Self { nx: 33, nz: 24 }
    }
}

impl OracleResolution {
    pub fn new(nx: usize, nz: usize) -> Result<Self> {
        let res = Self { nx, nz };
        res.validate()?;
        Ok(res)
    }

    fn validate(&self) -> Result<()> {
        if self.nx < MIN_NX || self.nx.is_multiple_of(2) {
            return Err(Error::OracleResolution(format!(
                "nx must be odd and at least {MIN_NX}, got {}",
                self.nx
            )));
        }
        if self.nz < MIN_NZ {
            return Err(Error::OracleResolution(format!(
                "nz must be at least {MIN_NZ}, got {}",
                self.nz
            )));
        }
        Ok(())
    }
}

/// Chebyshev–Gauss–Lobatto nodes `cos(πk/n)` and differentiation matrix.
fn chebyshev(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let nodes: Vec<f64> = (0..=n).map(|k| (PI * k as f64 / n as f64).cos()).collect();
    let weight = |k: usize| {
        let end = if k == 0 || k == n { 2.0 } else { 1.0 };
        if k.is_multiple_of(2) {
            end
        } else {
            -end
        }
    };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = weight(i) / weight(j) / (nodes[i] - nodes[j]);
            }
        }
    }
    for i in 0..=n {
        let off: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -off;
    }
    (nodes, d)
}

/// Fourier collocation matrices for `∂_x + iθ` and its square on `nx` points.
fn shifted_fourier(nx: usize, theta: f64) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let half = (nx / 2) as i64;
    let mut first = vec![Complex64::new(0.0, 0.0); nx];
    let mut second = vec![Complex64::new(0.0, 0.0); nx];
    for (offset, (f, s)) in first.iter_mut().zip(second.iter_mut()).enumerate() {
        let x = 2.0 * PI * offset as f64 / nx as f64;
        for k in -half..=half {
            let kt = k as f64 + theta;
            let wave = Complex64::from_polar(1.0 / nx as f64, k as f64 * x);
            *f += Complex64::new(0.0, kt) * wave;
            *s += -kt * kt * wave;
        }
    }
    let build = |kernel: &[Complex64]| DMatrix::from_fn(nx, nx, |m, l| kernel[(m + nx - l) % nx]);
    (build(&first), build(&second))
}

/// `G_θ[εβ] ψ` by direct solution of the boundary value problem.
///
/// The result lives on `ψ`'s own mode window, which must fit the grid
/// (`nx >= 2N + 2`).
pub fn apply_dno_oracle(
    profile: &BathymetryProfile,
    theta: f64,
    psi: &FourierField,
    resolution: OracleResolution,
) -> Result<FourierField> {
    resolution.validate()?;
    let OracleResolution { nx, nz } = resolution;
    let trunc = psi.truncation();
    if nx < 2 * trunc.cutoff() + 2 {
        return Err(Error::OracleResolution(format!(
            "nx = {nx} cannot resolve modes up to |j| = {}",
            trunc.cutoff()
        )));
    }

    let xs: Vec<f64> = (0..nx).map(|i| 2.0 * PI * i as f64 / nx as f64).collect();
    let eps = profile.eps();
    let mut d = Vec::with_capacity(nx);
    let mut d1 = Vec::with_capacity(nx);
    let mut d2 = Vec::with_capacity(nx);
    for &x in &xs {
        let (b1, b2) = profile.beta_derivatives_at(x);
        d.push(profile.fluid_depth_at(x));
        d1.push(-eps * b1);
        d2.push(-eps * b2);
    }

    let (nodes, cheb) = chebyshev(nz);
    // ζ = (s - 1)/2 maps [-1, 1] onto [-1, 0]; level 0 is the surface.
    let zeta: Vec<f64> = nodes.iter().map(|s| 0.5 * (s - 1.0)).collect();
    let dz = cheb * 2.0;
    let dzz = &dz * &dz;
    let (dx, dxx) = shifted_fourier(nx, theta);

    let surface = synthesize(psi, nx)?;
    let unknowns = nx * nz;
    let col = |i: usize, k: usize| (k - 1) * nx + i;
    let mut a = DMatrix::<Complex64>::zeros(unknowns, unknowns);
    let mut rhs = DVector::<Complex64>::zeros(unknowns);

    let add = |a: &mut DMatrix<Complex64>,
               rhs: &mut DVector<Complex64>,
               row: usize,
               i: usize,
               k: usize,
               v: Complex64| {
        if k == 0 {
            rhs[row] -= v * surface[i];
        } else {
            a[(row, col(i, k))] += v;
        }
    };

    for k in 1..=nz {
        let z = zeta[k];
        for i in 0..nx {
            let row = col(i, k);
            if k < nz {
                for l in 0..nx {
                    add(&mut a, &mut rhs, row, l, k, dxx[(i, l)] * (d[i] * d[i]));
                    let mixed = dx[(i, l)] * (-2.0 * z * d[i] * d1[i]);
                    if mixed.norm() > 0.0 {
                        for m in 0..=nz {
                            add(&mut a, &mut rhs, row, l, m, mixed * dz[(k, m)]);
                        }
                    }
                }
                let c2 = 1.0 + z * z * d1[i] * d1[i];
                let c1 = z * (2.0 * d1[i] * d1[i] - d[i] * d2[i]);
                for m in 0..=nz {
                    let v = c2 * dzz[(k, m)] + c1 * dz[(k, m)];
                    add(&mut a, &mut rhs, row, i, m, Complex64::new(v, 0.0));
                }
            } else {
                for l in 0..nx {
                    add(&mut a, &mut rhs, row, l, k, dx[(i, l)] * (d[i] * d1[i]));
                }
                let c1 = 1.0 + d1[i] * d1[i];
                for m in 0..=nz {
                    add(
                        &mut a,
                        &mut rhs,
                        row,
                        i,
                        m,
                        Complex64::new(c1 * dz[(k, m)], 0.0),
                    );
                }
            }
        }
    }

    let solution = a.clone().lu().solve(&rhs).ok_or(Error::OracleSolve {
        residual: f64::INFINITY,
        tolerance: RESIDUAL_TOL,
    })?;
    let residual = (&a * &solution - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::OracleSolve {
            residual,
            tolerance: RESIDUAL_TOL,
        });
    }

    let normal: Vec<Complex64> = (0..nx)
        .map(|i| {
            let mut acc = surface[i] * dz[(0, 0)];
            for m in 1..=nz {
                acc += solution[col(i, m)] * dz[(0, m)];
            }
            acc / d[i]
        })
        .collect();
    analyze(&normal, trunc)
}
