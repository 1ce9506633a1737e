//! Bloch eigenfunctions in physical space and the linearized evolution
//! `∂²_t η + g G η = 0` at a fixed Bloch parameter.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{synthesize, FourierField};
use crate::matrix::OperatorMatrix;
use crate::spectrum::{eigen_decompose_raw, EigenPair, Eigensystem};

const ZERO_MODE_TOL: f64 = 1e-10;

/// Samples of `Φ(x) = e^{iθx} ψ(x)` at `x_m = 2πm / grid_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochWave {
    pub theta: f64,
    pub grid_size: usize,
    pub xs: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl BlochWave {
    /// `max |Φ(x + 2π) - e^{2πiθ} Φ(x)|` over all samples that have a
    /// partner one period later.
    pub fn quasi_periodicity_defect(&self) -> f64 {
        let multiplier = Complex64::from_polar(1.0, 2.0 * PI * self.theta);
        self.values
            .iter()
            .zip(self.values.iter().skip(self.grid_size))
            .map(|(a, b)| (b - multiplier * a).norm())
            .fold(0.0, f64::max)
    }
}

/// Physical-space Bloch wave over `periods` periods.
pub fn reconstruct_bloch_eigenfunction(
    pair: &EigenPair,
    theta: f64,
    grid_size: usize,
    periods: usize,
) -> Result<BlochWave> {
    let periodic = synthesize(&pair.vector, grid_size)?;
    let total = grid_size * periods.max(1);
    let xs: Vec<f64> = (0..total)
        .map(|m| 2.0 * PI * m as f64 / grid_size as f64)
        .collect();
    let values = xs
        .iter()
        .enumerate()
        .map(|(m, &x)| Complex64::from_polar(1.0, theta * x) * periodic[m % grid_size])
        .collect();
    Ok(BlochWave {
        theta,
        grid_size,
        xs,
        values,
    })
}

/// Surface elevation and its time derivative, as Fourier coefficients of the
/// periodic factor at a fixed `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub eta: FourierField,
    pub eta_dot: FourierField,
    pub gravity: f64,
    pub time: f64,
}

impl WaveState {
    pub fn new(eta: FourierField, eta_dot: FourierField, gravity: f64) -> Result<Self> {
        if !(gravity.is_finite() && gravity > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "gravity must be positive, got {gravity}"
            )));
        }
        if eta.truncation() != eta_dot.truncation() {
            return Err(Error::DimensionMismatch {
                expected: eta.truncation().dim(),
                got: eta_dot.truncation().dim(),
            });
        }
        Ok(Self {
            eta,
            eta_dot,
            gravity,
            time: 0.0,
        })
    }
}

/// Exact spectral propagator for one truncated `G_θ`.
#[derive(Debug, Clone)]
pub struct BlochPropagator {
    operator: OperatorMatrix,
    eigen: Eigensystem,
}

impl BlochPropagator {
    pub fn new(operator: OperatorMatrix) -> Result<Self> {
        let eigen = eigen_decompose_raw(&operator)?;
        if let Some(&lowest) = eigen.values().first() {
            if lowest < -ZERO_MODE_TOL {
                return Err(Error::Instability { eigenvalue: lowest });
            }
        }
        Ok(Self { operator, eigen })
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.operator
    }

    pub fn eigensystem(&self) -> &Eigensystem {
        &self.eigen
    }

    /// `½⟨η̇, η̇⟩ + (g/2)⟨η, Gη⟩`.
    pub fn energy(&self, state: &WaveState) -> f64 {
        let kinetic = state.eta_dot.norm_l2().powi(2);
        let g_eta = self.operator.apply(&state.eta);
        let potential = state
            .eta
            .resized(self.operator.truncation())
            .inner(&g_eta)
            .re;
        0.5 * kinetic + 0.5 * state.gravity * potential
    }

    pub fn evolve(&self, initial: &WaveState, t: f64) -> Result<WaveState> {
        let trunc = self.operator.truncation();
        if initial.eta.truncation() != trunc || initial.eta_dot.truncation() != trunc {
            return Err(Error::DimensionMismatch {
                expected: trunc.dim(),
                got: initial.eta.truncation().dim(),
            });
        }
        let v = self.eigen.vectors();
        let a0 = v.adjoint() * DVector::from_column_slice(initial.eta.coeffs());
        let b0 = v.adjoint() * DVector::from_column_slice(initial.eta_dot.coeffs());
        let mut a = a0.clone();
        let mut b = b0.clone();
        for (n, &lambda) in self.eigen.values().iter().enumerate() {
            if lambda.abs() <= ZERO_MODE_TOL {
                a[n] = a0[n] + b0[n] * t;
                b[n] = b0[n];
            } else {
                let omega = (initial.gravity * lambda).sqrt();
                let (sin, cos) = (omega * t).sin_cos();
                a[n] = a0[n] * cos + b0[n] * (sin / omega);
                b[n] = -a0[n] * (omega * sin) + b0[n] * cos;
            }
        }
        let eta = v * a;
        let eta_dot = v * b;
        Ok(WaveState {
            eta: FourierField::from_coeffs(trunc, eta.as_slice().to_vec())?,
            eta_dot: FourierField::from_coeffs(trunc, eta_dot.as_slice().to_vec())?,
            gravity: initial.gravity,
            time: initial.time + t,
        })
    }
}

/// Advance `initial` by `t` under the propagator.
pub fn evolve_linearized(
    propagator: &BlochPropagator,
    initial: &WaveState,
    t: f64,
) -> Result<WaveState> {
    propagator.evolve(initial, t)
}
