//! JSON run configuration and its validation.
//!
//! Everything here runs before any output file is touched.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use bloch_dno::spectrum::required_truncation;
use bloch_dno::{
    BathymetryProfile, FourierField, OracleResolution, Preset, ThetaGrid, Truncation, MAX_ORDER,
};

use crate::error::{CliError, CliResult};

/// `(k, re, im)`: amplitude `re + i·im` of `e^{ikx}`.
pub type ModeTriple = (i64, f64, f64);

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Preset(String),
    Modes(Vec<ModeTriple>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileSpec,
    #[serde(default = "default_depth")]
    pub depth: f64,
    #[serde(default)]
    pub eps: f64,
    /// Lower bound on `h - εβ(x)`; defaults to `h/100`.
    pub clearance: Option<f64>,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_theta_points")]
    pub theta_points: usize,
    /// Highest band index `n_max`; bands `Λ_0..Λ_{n_max}` are reported.
    #[serde(default = "default_bands")]
    pub bands: usize,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub gap_scan: Option<LadderOptions>,
    pub gap_scaling: Option<LadderOptions>,
    pub oracle: Option<OracleOptions>,
    pub evolve: Option<EvolveOptions>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderOptions {
    pub eps: Vec<f64>,
    pub gaps: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOptions {
    #[serde(default = "default_oracle_theta")]
    pub theta: f64,
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_nz")]
    pub nz: usize,
    /// Mode window of the probe and of the compared series.
    #[serde(default = "default_oracle_cutoff")]
    pub cutoff: usize,
    /// Explicit probe; when absent a random one with `|k| <= probe_modes` is
    /// drawn from `seed`.
    pub probe: Option<Vec<ModeTriple>>,
    #[serde(default = "default_probe_modes")]
    pub probe_modes: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveOptions {
    #[serde(default)]
    pub theta: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
    pub eta: Vec<ModeTriple>,
    #[serde(default)]
    pub eta_dot: Vec<ModeTriple>,
    pub times: Vec<f64>,
    /// Samples per period; defaults to `2N + 2`.
    pub samples: Option<usize>,
}

fn default_depth() -> f64 {
    1.0
}
fn default_cutoff() -> usize {
    16
}
fn default_order() -> usize {
    4
}
fn default_theta_points() -> usize {
    ThetaGrid::DEFAULT_POINTS
}
fn default_bands() -> usize {
    4
}
fn default_oracle_theta() -> f64 {
    0.1
}
fn default_nx() -> usize {
    OracleResolution::default().nx
}
fn default_nz() -> usize {
    OracleResolution::default().nz
}
fn default_oracle_cutoff() -> usize {
    8
}
fn default_probe_modes() -> usize {
    4
}
fn default_gravity() -> f64 {
    9.81
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    /// Named preset, if the profile was given by name.
    pub fn preset(&self) -> Option<Preset> {
        match &self.profile {
            ProfileSpec::Preset(name) => name.parse().ok(),
            ProfileSpec::Modes(_) => None,
        }
    }

    pub fn profile_label(&self) -> String {
        match &self.profile {
            ProfileSpec::Preset(name) => name.clone(),
            ProfileSpec::Modes(_) => "custom".into(),
        }
    }

    pub fn profile_at(&self, eps: f64) -> CliResult<BathymetryProfile> {
        let beta = match &self.profile {
            ProfileSpec::Preset(name) => name.parse::<Preset>().map_err(CliError::Core)?.beta(),
            ProfileSpec::Modes(triples) => field_from_triples("profile", triples)?,
        };
        let clearance = self.clearance.unwrap_or(0.01 * self.depth);
        BathymetryProfile::new(self.depth, beta, eps, clearance).map_err(CliError::Core)
    }

    fn truncation(&self) -> CliResult<Truncation> {
        Truncation::new(self.cutoff).map_err(CliError::Core)
    }

    fn check_order(&self) -> CliResult<()> {
        if !(1..=MAX_ORDER).contains(&self.order) {
            return Err(CliError::config(format!(
                "order must lie in 1..={MAX_ORDER}, got {}",
                self.order
            )));
        }
        Ok(())
    }

    fn check_sweep(&self, profile: &BathymetryProfile, n_max: usize) -> CliResult<ThetaGrid> {
        self.check_order()?;
        let required = required_truncation(n_max, self.order, profile.max_wavenumber());
        if self.cutoff < required {
            return Err(CliError::config(format!(
                "cutoff N = {} is too small for bands 0..={n_max} at order {}; need N >= {required}",
                self.cutoff, self.order
            )));
        }
        ThetaGrid::uniform(self.theta_points).map_err(CliError::Core)
    }

    pub fn band_structure_plan(&self) -> CliResult<SweepPlan> {
        let profile = self.profile_at(self.eps)?;
        if self.bands == 0 {
            return Err(CliError::config("bands must be at least 1"));
        }
        let grid = self.check_sweep(&profile, self.bands)?;
        Ok(SweepPlan {
            profile,
            grid,
            trunc: self.truncation()?,
            order: self.order,
            n_max: self.bands,
        })
    }

    pub fn ladder_plan(&self, scaling: bool) -> CliResult<LadderPlan> {
        let (key, min_len) = if scaling {
            ("gap_scaling", 4)
        } else {
            ("gap_scan", 1)
        };
        let opts = if scaling {
            self.gap_scaling.as_ref()
        } else {
            self.gap_scan.as_ref()
        }
        .ok_or_else(|| CliError::config(format!("missing section '{key}'")))?;
        if opts.eps.len() < min_len {
            return Err(CliError::config(format!(
                "{key}.eps needs at least {min_len} values, got {}",
                opts.eps.len()
            )));
        }
        for &e in &opts.eps {
            let ok = e.is_finite() && if scaling { e > 0.0 } else { e >= 0.0 };
            if !ok {
                return Err(CliError::config(format!(
                    "{key}.eps contains invalid value {e}"
                )));
            }
        }
        let gaps = match &opts.gaps {
            Some(g) => g.clone(),
            None => (1..=self.bands).collect(),
        };
        if gaps.is_empty() || gaps.contains(&0) {
            return Err(CliError::config(format!(
                "{key}.gaps must be a non-empty list of indices >= 1"
            )));
        }
        let unique: BTreeSet<usize> = gaps.iter().copied().collect();
        if unique.len() != gaps.len() {
            return Err(CliError::config(format!("{key}.gaps has repeated entries")));
        }
        let n_max = *unique.iter().next_back().expect("non-empty");
        let profiles = opts
            .eps
            .iter()
            .map(|&e| self.profile_at(e))
            .collect::<CliResult<Vec<_>>>()?;
        let grid = self.check_sweep(&profiles[0], n_max)?;
        Ok(LadderPlan {
            eps: opts.eps.clone(),
            profiles,
            gaps,
            grid,
            trunc: self.truncation()?,
            order: self.order,
            n_max,
        })
    }

    pub fn oracle_plan(&self) -> CliResult<OraclePlan> {
        let profile = self.profile_at(self.eps)?;
        let opts = self.oracle.clone().unwrap_or(OracleOptions {
            theta: default_oracle_theta(),
            nx: default_nx(),
            nz: default_nz(),
            cutoff: default_oracle_cutoff(),
            probe: None,
            probe_modes: default_probe_modes(),
        });
        check_theta("oracle.theta", opts.theta)?;
        let resolution = OracleResolution::new(opts.nx, opts.nz).map_err(CliError::Core)?;
        let trunc = Truncation::new(opts.cutoff).map_err(CliError::Core)?;
        if opts.nx < 2 * opts.cutoff + 2 {
            return Err(CliError::config(format!(
                "oracle.nx = {} cannot resolve oracle.cutoff = {}; need nx >= {}",
                opts.nx,
                opts.cutoff,
                2 * opts.cutoff + 2
            )));
        }
        let probe = match &opts.probe {
            Some(triples) => {
                let field = field_from_triples("oracle.probe", triples)?;
                fit_window("oracle.probe", &field, trunc)?
            }
            None => {
                if opts.probe_modes == 0 || opts.probe_modes > opts.cutoff {
                    return Err(CliError::config(format!(
                        "oracle.probe_modes must lie in 1..={}, got {}",
                        opts.cutoff, opts.probe_modes
                    )));
                }
                random_probe(self.seed, opts.probe_modes).resized(trunc)
            }
        };
        Ok(OraclePlan {
            profile,
            theta: opts.theta,
            resolution,
            probe,
        })
    }

    pub fn evolve_plan(&self) -> CliResult<EvolvePlan> {
        self.check_order()?;
        let profile = self.profile_at(self.eps)?;
        let opts = self
            .evolve
            .as_ref()
            .ok_or_else(|| CliError::config("missing section 'evolve'"))?;
        check_theta("evolve.theta", opts.theta)?;
        if !(opts.gravity.is_finite() && opts.gravity > 0.0) {
            return Err(CliError::config(format!(
                "evolve.gravity must be positive, got {}",
                opts.gravity
            )));
        }
        if opts.times.is_empty() {
            return Err(CliError::config("evolve.times must not be empty"));
        }
        if let Some(t) = opts.times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(CliError::config(format!(
                "evolve.times must be finite and non-negative, got {t}"
            )));
        }
        let trunc = self.truncation()?;
        let samples = opts.samples.unwrap_or(2 * self.cutoff + 2);
        if samples < 2 * self.cutoff + 2 {
            return Err(CliError::config(format!(
                "evolve.samples = {samples} aliases the mode window; need at least {}",
                2 * self.cutoff + 2
            )));
        }
        if opts.eta.is_empty() {
            return Err(CliError::config("evolve.eta must list at least one mode"));
        }
        let eta = fit_window(
            "evolve.eta",
            &field_from_triples("evolve.eta", &opts.eta)?,
            trunc,
        )?;
        let eta_dot = if opts.eta_dot.is_empty() {
            FourierField::zeros(trunc)
        } else {
            let f = field_from_triples("evolve.eta_dot", &opts.eta_dot)?;
            fit_window("evolve.eta_dot", &f, trunc)?
        };
        Ok(EvolvePlan {
            profile,
            theta: opts.theta,
            gravity: opts.gravity,
            trunc,
            order: self.order,
            eta,
            eta_dot,
            times: opts.times.clone(),
            samples,
        })
    }
}

pub struct SweepPlan {
    pub profile: BathymetryProfile,
    pub grid: ThetaGrid,
    pub trunc: Truncation,
    pub order: usize,
    pub n_max: usize,
}

pub struct LadderPlan {
    pub eps: Vec<f64>,
    pub profiles: Vec<BathymetryProfile>,
    pub gaps: Vec<usize>,
    pub grid: ThetaGrid,
    pub trunc: Truncation,
    pub order: usize,
    pub n_max: usize,
}

pub struct OraclePlan {
    pub profile: BathymetryProfile,
    pub theta: f64,
    pub resolution: OracleResolution,
    pub probe: FourierField,
}

pub struct EvolvePlan {
    pub profile: BathymetryProfile,
    pub theta: f64,
    pub gravity: f64,
    pub trunc: Truncation,
    pub order: usize,
    pub eta: FourierField,
    pub eta_dot: FourierField,
    pub times: Vec<f64>,
    pub samples: usize,
}

fn check_theta(key: &str, theta: f64) -> CliResult<()> {
    if !(theta.is_finite() && (-0.5..=0.5).contains(&theta)) {
        return Err(CliError::config(format!(
            "{key} must lie in [-1/2, 1/2], got {theta}"
        )));
    }
    Ok(())
}

fn field_from_triples(key: &str, triples: &[ModeTriple]) -> CliResult<FourierField> {
    let mut seen = BTreeSet::new();
    for &(k, re, im) in triples {
        if !seen.insert(k) {
            return Err(CliError::config(format!("{key}: mode {k} listed twice")));
        }
        if !(re.is_finite() && im.is_finite()) {
            return Err(CliError::config(format!(
                "{key}: mode {k} has a non-finite amplitude"
            )));
        }
    }
    let modes: Vec<(i64, Complex64)> = triples
        .iter()
        .map(|&(k, re, im)| (k, Complex64::new(re, im)))
        .collect();
    Ok(FourierField::from_modes(&modes))
}

fn fit_window(key: &str, field: &FourierField, trunc: Truncation) -> CliResult<FourierField> {
    if field.max_mode() > trunc.cutoff() {
        return Err(CliError::config(format!(
            "{key}: mode {} lies outside the window |k| <= {}",
            field.max_mode(),
            trunc.cutoff()
        )));
    }
    Ok(field.resized(trunc))
}

fn random_probe(seed: u64, modes: usize) -> FourierField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let m = modes as i64;
    let list: Vec<(i64, Complex64)> = (-m..=m)
        .map(|k| {
            (
                k,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    FourierField::from_modes(&list)
}
