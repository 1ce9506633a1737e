//! Bloch band structure of linear water waves over periodic bathymetry,
//! computed from a Taylor expansion of the Dirichlet–Neumann operator in the
//! bottom amplitude and analysed by Rayleigh–Schrödinger-type perturbation
//! theory near band crossings.

pub mod dno;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod matrix;
pub mod oracle;
pub mod perturbation;
pub mod profile;
pub mod spectrum;

pub use dno::{assemble_g_theta, build_m_terms, DnoSeries, MAX_ORDER};
pub use error::{Error, Result};
pub use evolution::{
    evolve_linearized, reconstruct_bloch_eigenfunction, BlochPropagator, BlochWave, WaveState,
};
pub use fourier::{analyze, synthesize, BlochParameter, FourierField, Truncation};
pub use matrix::{HermitianOperatorMatrix, OperatorMatrix};
pub use oracle::{apply_dno_oracle, OracleResolution};
pub use profile::{BathymetryProfile, Preset};
pub use spectrum::{
    band_edges, band_sweep, eigen_decompose, flat_bottom_reference, BandStructure, EigenPair,
    Eigensystem, GapReport, ThetaGrid,
};
