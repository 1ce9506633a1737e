//! Eigen-decomposition, θ-sweeps and gap extraction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dno::assemble_g_theta;
use crate::error::{Error, Result};
use crate::fourier::{tanh_symbol, BlochParameter, FourierField, Truncation};
use crate::matrix::OperatorMatrix;
use crate::profile::BathymetryProfile;

const HERMITIAN_TOL: f64 = 1e-12;
const CLUSTER_TOL: f64 = 1e-10;
const NEGATIVE_TOL: f64 = 1e-10;
const CLOSED_ABS: f64 = 1e-10;
const CLOSED_REL: f64 = 1e-8;
/// Extra modes kept above the highest requested band, before the `order·K`
/// allowance for the bandwidth of the Taylor terms.
pub const TRUNCATION_MARGIN: usize = 4;

/// One eigenvalue with its unit eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: FourierField,
}

/// Ascending eigenvalues and orthonormal eigenvectors (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    trunc: Truncation,
    values: Vec<f64>,
    vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn pair(&self, i: usize) -> EigenPair {
        EigenPair {
            value: self.values[i],
            vector: FourierField::from_coeffs(
                self.trunc,
                self.vectors.column(i).iter().copied().collect(),
            )
            .expect("column length matches truncation"),
        }
    }

    /// `max |V*V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.vectors.adjoint() * &self.vectors;
        let n = gram.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((gram[(r, c)] - target).norm());
            }
        }
        worst
    }
}

fn check_hermitian(matrix: &OperatorMatrix) -> Result<()> {
    let defect = matrix.hermiticity_defect();
    if defect > HERMITIAN_TOL * matrix.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

fn symmetrized(matrix: &OperatorMatrix) -> DMatrix<Complex64> {
    let a = matrix.as_matrix();
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Full eigensystem of a Hermitian operator matrix.
///
/// Eigenvalues ascend (stable sort). Inside a cluster of eigenvalues closer
/// than `1e-10·max(1, |λ|)` the basis is rebuilt by projecting the unit
/// vectors of the heaviest Fourier modes and orthonormalizing in mode order,
/// so the result does not depend on the eigensolver's internal choices. Each
/// vector is then phased so its largest component is real and positive.
pub fn eigen_decompose(matrix: &OperatorMatrix) -> Result<Eigensystem> {
    decompose(matrix, true)
}

/// Sorted eigensystem without the cluster rebuild. Inside a cluster of
/// distinct but close eigenvalues the rebuilt vectors are only approximate
/// eigenvectors, which matters for time evolution.
pub(crate) fn eigen_decompose_raw(matrix: &OperatorMatrix) -> Result<Eigensystem> {
    decompose(matrix, false)
}

fn decompose(matrix: &OperatorMatrix, rebuild: bool) -> Result<Eigensystem> {
    check_hermitian(matrix)?;
    let eig = symmetrized(matrix).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<Complex64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let mut start = 0;
    while rebuild && start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= CLUSTER_TOL * values[end].abs().max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            rebuild_cluster(&mut vectors, start, end);
        }
        start = end;
    }

    for c in 0..n {
        fix_phase(&mut vectors, c);
    }
    Ok(Eigensystem {
        trunc: matrix.truncation(),
        values,
        vectors,
    })
}

fn rebuild_cluster(vectors: &mut DMatrix<Complex64>, start: usize, end: usize) {
    let n = vectors.nrows();
    let size = end - start;
    let block = vectors.columns(start, size).into_owned();
    let weights: Vec<f64> = (0..n)
        .map(|r| block.row(r).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));

    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(size);
    // Heaviest modes first, falling back to lighter ones if a projection
    // turns out dependent on the vectors already built.
    let mut picks: Vec<(usize, DVector<Complex64>)> = Vec::new();
    for &r in &candidates {
        if picks.len() == size {
            break;
        }
        let mut v = &block * block.row(r).adjoint();
        for (_, b) in &picks {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            picks.push((r, v / Complex64::new(norm, 0.0)));
        }
    }
    // Re-run Gram–Schmidt in ascending mode order so the outcome depends only
    // on which modes were picked.
    picks.sort_by_key(|(r, _)| *r);
    for (r, _) in &picks {
        let mut v = &block * block.row(*r).adjoint();
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let norm = v.norm();
        basis.push(v / Complex64::new(norm, 0.0));
    }
    for (k, v) in basis.iter().enumerate() {
        vectors.set_column(start + k, v);
    }
}

fn fix_phase(vectors: &mut DMatrix<Complex64>, c: usize) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for r in 0..vectors.nrows() {
        let m = vectors[(r, c)].norm();
        // Strictly larger (with a small slack) so ties resolve to the lowest mode.
        if m > best_norm * (1.0 + 1e-12) {
            best = r;
            best_norm = m;
        }
    }
    if best_norm > 0.0 {
        let phase = vectors[(best, c)].conj() / best_norm;
        for r in 0..vectors.nrows() {
            vectors[(r, c)] *= phase;
        }
    }
}

/// Flat-bottom band `Λ_n^{(0)}(θ)`: the `n`-th smallest of `g_j(θ)`.
///
/// With `n = 2m`: `g_{-m}` for `θ < 0` and `g_m` for `θ ≥ 0`.
/// With `n = 2m - 1`: `g_m` for `θ < 0` and `g_{-m}` for `θ ≥ 0`.
/// `θ` is first reduced into `[-1/2, 1/2)`.
pub fn flat_bottom_reference(theta: BlochParameter, n: usize, depth: f64) -> f64 {
    let t = theta.value();
    let mode = flat_bottom_mode(t, n);
    let k = mode as f64 + t;
    k * (depth * k).tanh()
}

/// Fourier mode carrying flat band `n` at reduced `θ`.
pub fn flat_bottom_mode(theta: f64, n: usize) -> i64 {
    let m = n.div_ceil(2) as i64;
    match (n.is_multiple_of(2), theta < 0.0) {
        (true, true) | (false, false) => -m,
        (true, false) | (false, true) => m,
    }
}

/// Uniform grid on the closed interval `[-1/2, 1/2]`.
///
/// The number of points is odd so that `0` is a node; the final node `1/2` is
/// the periodic image of `-1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid(Vec<f64>);

impl ThetaGrid {
    pub const DEFAULT_POINTS: usize = 257;

    pub fn uniform(points: usize) -> Result<Self> {
        if points < 3 || points.is_multiple_of(2) {
            return Err(Error::InvalidThetaGrid(format!(
                "need an odd number of points >= 3 so that 0 and -1/2 are nodes, got {points}"
            )));
        }
        let step = 1.0 / (points - 1) as f64;
        let half = (points - 1) / 2;
        let values = (0..points)
            .map(|i| (i as f64 - half as f64) * step)
            .collect();
        Ok(Self(values))
    }

    /// Arbitrary ascending grid inside `[-1/2, 1/2]` containing `0` and `-1/2`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values
            .iter()
            .any(|t| !t.is_finite() || *t < -0.5 || *t > 0.5)
        {
            return Err(Error::InvalidThetaGrid(
                "values must lie in [-1/2, 1/2]".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidThetaGrid(
                "values must be strictly ascending".into(),
            ));
        }
        if !values.contains(&0.0) || !values.contains(&-0.5) {
            return Err(Error::InvalidThetaGrid(
                "grid must contain 0 and -1/2".into(),
            ));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self::uniform(Self::DEFAULT_POINTS).expect("default grid is valid")
    }
}

/// Bands `Λ_0..Λ_{n_max}` sampled on a θ-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub theta_grid: Vec<f64>,
    /// `bands[n][i] = Λ_n(θ_i)`.
    pub bands: Vec<Vec<f64>>,
    pub depth: f64,
    pub eps: f64,
    pub cutoff: usize,
    pub order: usize,
}

impl BandStructure {
    pub fn n_max(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn band(&self, n: usize) -> &[f64] {
        &self.bands[n]
    }

    /// Sorted labeling, `Λ_0(0) ≈ 0` and non-negativity.
    pub fn verify(&self) -> Result<()> {
        for (i, &t) in self.theta_grid.iter().enumerate() {
            for n in 1..self.bands.len() {
                if self.bands[n][i] < self.bands[n - 1][i] {
                    return Err(Error::InvariantViolation(format!(
                        "bands {} and {n} out of order at theta = {t}",
                        n - 1
                    )));
                }
            }
            if t == 0.0 && self.bands[0][i].abs() > NEGATIVE_TOL {
                return Err(Error::InvariantViolation(format!(
                    "Lambda_0(0) = {:.3e} is not zero",
                    self.bands[0][i]
                )));
            }
            if self.bands[0][i] < -NEGATIVE_TOL {
                return Err(Error::InvariantViolation(format!(
                    "Lambda_0({t}) = {:.3e} is negative",
                    self.bands[0][i]
                )));
            }
        }
        Ok(())
    }
}

/// Smallest truncation allowed for `n_max` bands.
pub fn required_truncation(n_max: usize, order: usize, max_wavenumber: usize) -> usize {
    n_max + TRUNCATION_MARGIN + order * max_wavenumber
}

/// Sorted eigenvalues of `G_θ` through `ε^order` at every grid point.
pub fn band_sweep(
    profile: &BathymetryProfile,
    grid: &ThetaGrid,
    trunc: Truncation,
    order: usize,
    n_max: usize,
) -> Result<BandStructure> {
    let required = required_truncation(n_max, order, profile.max_wavenumber());
    if trunc.cutoff() < required {
        return Err(Error::InsufficientTruncation {
            got: trunc.cutoff(),
            bands: n_max + 1,
            required,
        });
    }
    let columns: Vec<Vec<f64>> = grid
        .values()
        .par_iter()
        .map(|&theta| {
            let g = assemble_g_theta(profile, theta, trunc, order)?;
            check_hermitian(&g)?;
            let mut values: Vec<f64> = symmetrized(&g)
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .collect();
            values.sort_by(f64::total_cmp);
            values.truncate(n_max + 1);
            Ok(values)
        })
        .collect::<Result<_>>()?;
    let bands = (0..=n_max)
        .map(|n| columns.iter().map(|col| col[n]).collect())
        .collect();
    Ok(BandStructure {
        theta_grid: grid.values().to_vec(),
        bands,
        depth: profile.depth(),
        eps: profile.eps(),
        cutoff: trunc.cutoff(),
        order,
    })
}

/// Edges of the gap between `Λ_{n-1}` and `Λ_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub n: usize,
    /// `Λ_{n-1}^+ = max_θ Λ_{n-1}`.
    pub lower_edge: f64,
    /// `Λ_n^- = min_θ Λ_n`.
    pub upper_edge: f64,
    pub width: f64,
    pub center: f64,
    pub lower_edge_theta: f64,
    pub upper_edge_theta: f64,
    pub closed: bool,
    /// Set when `Λ_{n-1}^+ > Λ_n^-`, i.e. the bands overlap in energy.
    pub ordering_violation: bool,
    pub overlap: f64,
}

pub fn is_closed(width: f64, upper_edge: f64) -> bool {
    width <= CLOSED_ABS.max(CLOSED_REL * upper_edge)
}

pub fn band_edges(bs: &BandStructure) -> Vec<GapReport> {
    let argext = |band: &[f64], max: bool| {
        let mut best = 0;
        for (i, &v) in band.iter().enumerate() {
            if (max && v > band[best]) || (!max && v < band[best]) {
                best = i;
            }
        }
        best
    };
    (1..bs.bands.len())
        .map(|n| {
            let lo = argext(&bs.bands[n - 1], true);
            let hi = argext(&bs.bands[n], false);
            let lower_edge = bs.bands[n - 1][lo];
            let upper_edge = bs.bands[n][hi];
            let width = (upper_edge - lower_edge).max(0.0);
            GapReport {
                n,
                lower_edge,
                upper_edge,
                width,
                center: 0.5 * (upper_edge + lower_edge),
                lower_edge_theta: bs.theta_grid[lo],
                upper_edge_theta: bs.theta_grid[hi],
                closed: is_closed(width, upper_edge),
                ordering_violation: lower_edge > upper_edge,
                overlap: (lower_edge - upper_edge).max(0.0),
            }
        })
        .collect()
}

/// `g_j(θ)` for the flat bottom; handy for diagonal checks.
pub fn flat_symbol(mode: i64, theta: f64, depth: f64) -> f64 {
    tanh_symbol(mode as f64 + theta, depth)
}
