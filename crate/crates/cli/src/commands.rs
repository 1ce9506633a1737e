//! The subcommands. Each one computes everything in memory and hands back
//! the artifacts; nothing is written until the whole run has succeeded.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use bloch_dno::perturbation::{
    analytic_gap_formula, cosx_gap2_full, fit_gap_scaling, GapFormula, ScalingFit,
};
use bloch_dno::{
    apply_dno_oracle, assemble_g_theta, band_edges, band_sweep, synthesize, BandStructure,
    BlochPropagator, Error, GapReport, Preset, WaveState, MAX_ORDER,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{csv, json, Artifact};

/// Allowed relative energy drift along an evolution trace.
const ENERGY_TOL: f64 = 1e-8;

#[derive(Serialize)]
struct GapsReport<'a> {
    profile: String,
    depth: f64,
    eps: f64,
    cutoff: usize,
    order: usize,
    theta_points: usize,
    gaps: &'a [GapReport],
}

pub fn band_structure(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let plan = cfg.band_structure_plan()?;
    let bs = band_sweep(
        &plan.profile,
        &plan.grid,
        plan.trunc,
        plan.order,
        plan.n_max,
    )?;
    bs.verify()?;
    let gaps = band_edges(&bs);
    let mut header = vec!["theta".to_string()];
    header.extend((0..=bs.n_max()).map(|n| format!("lambda_{n}")));
    let rows: Vec<Vec<f64>> = bs
        .theta_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row = vec![t];
            row.extend(bs.bands.iter().map(|band| band[i]));
            row
        })
        .collect();
    let report = GapsReport {
        profile: cfg.profile_label(),
        depth: cfg.depth,
        eps: cfg.eps,
        cutoff: plan.trunc.cutoff(),
        order: plan.order,
        theta_points: plan.grid.len(),
        gaps: &gaps,
    };
    Ok(vec![
        Artifact {
            name: "bands.csv",
            contents: csv(&header, &rows),
        },
        Artifact {
            name: "gaps.json",
            contents: json(&report),
        },
    ])
}

/// ε values, gap indices, and the gap reports for every ε in ladder order.
type LadderSweep = (Vec<f64>, Vec<usize>, Vec<Vec<GapReport>>);

fn ladder_sweeps(cfg: &RunConfig, scaling: bool) -> CliResult<LadderSweep> {
    let plan = cfg.ladder_plan(scaling)?;
    let sweeps: Vec<BandStructure> = plan
        .profiles
        .par_iter()
        .map(|p| band_sweep(p, &plan.grid, plan.trunc, plan.order, plan.n_max))
        .collect::<Result<_, Error>>()?;
    let mut reports = Vec::with_capacity(sweeps.len());
    for bs in &sweeps {
        bs.verify()?;
        reports.push(band_edges(bs));
    }
    Ok((plan.eps, plan.gaps, reports))
}

pub fn gap_scan(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let (eps, gaps, reports) = ladder_sweeps(cfg, false)?;
    let mut header = vec!["eps".to_string()];
    for m in &gaps {
        header.push(format!("gap_{m}_width"));
        header.push(format!("gap_{m}_center"));
    }
    let rows: Vec<Vec<f64>> = eps
        .iter()
        .zip(&reports)
        .map(|(&e, r)| {
            let mut row = vec![e];
            for &m in &gaps {
                row.push(r[m - 1].width);
                row.push(r[m - 1].center);
            }
            row
        })
        .collect();
    Ok(vec![Artifact {
        name: "gap_scan.csv",
        contents: csv(&header, &rows),
    }])
}

#[derive(Debug, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
enum Verdict {
    Open,
    Closed,
    /// Some widths sit at the noise floor; the fit uses the open ones.
    PartiallyClosed,
}

#[derive(Serialize)]
struct Comparison {
    formula: &'static str,
    exponent: f64,
    coefficient: f64,
    /// Fitted coefficient over predicted coefficient.
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct GapScaling {
    gap: usize,
    widths: Vec<f64>,
    verdict: Verdict,
    fit: Option<ScalingFit>,
    comparison: Vec<Comparison>,
}

#[derive(Serialize)]
struct ScalingReport {
    profile: String,
    depth: f64,
    cutoff: usize,
    order: usize,
    theta_points: usize,
    eps: Vec<f64>,
    gaps: Vec<GapScaling>,
}

/// Closed-form predictions that apply to `gap` of `preset`, as
/// `(name, exponent, coefficient)`.
fn predictions(
    preset: Option<Preset>,
    gap: usize,
    h: f64,
) -> CliResult<Vec<(&'static str, f64, f64)>> {
    let unit = |f: GapFormula, k: i32| -> CliResult<(&'static str, f64, f64)> {
        Ok((f.name(), k as f64, analytic_gap_formula(f, h, 1.0)?))
    };
    Ok(match (preset, gap) {
        (Some(Preset::Cosx), 1) => vec![unit(GapFormula::CosxGap1, 1)?],
        (Some(Preset::Cosx), 2) => vec![
            unit(GapFormula::CosxGap2, 4)?,
            ("cosx_gap2_full", 4.0, cosx_gap2_full(h, 1.0)?),
        ],
        (Some(Preset::Cos13), 2) => vec![unit(GapFormula::Cos13Gap2, 2)?],
        _ => Vec::new(),
    })
}

pub fn gap_scaling(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let (eps, gaps, reports) = ladder_sweeps(cfg, true)?;
    let mut entries = Vec::with_capacity(gaps.len());
    for &m in &gaps {
        let column: Vec<&GapReport> = reports.iter().map(|r| &r[m - 1]).collect();
        let widths: Vec<f64> = column.iter().map(|g| g.width).collect();
        let open: Vec<usize> = (0..column.len()).filter(|&i| !column[i].closed).collect();
        let verdict = if open.is_empty() {
            Verdict::Closed
        } else if open.len() < column.len() {
            Verdict::PartiallyClosed
        } else {
            Verdict::Open
        };
        let fit = if open.len() >= 3 {
            let e: Vec<f64> = open.iter().map(|&i| eps[i]).collect();
            let w: Vec<f64> = open.iter().map(|&i| widths[i]).collect();
            match fit_gap_scaling(&e, &w) {
                Ok(f) => Some(f),
                Err(Error::ClosedGap) => None,
                Err(other) => return Err(other.into()),
            }
        } else {
            None
        };
        let comparison = predictions(cfg.preset(), m, cfg.depth)?
            .into_iter()
            .map(|(formula, exponent, coefficient)| Comparison {
                formula,
                exponent,
                coefficient,
                ratio: fit.map(|f| f.coefficient / coefficient),
            })
            .collect();
        entries.push(GapScaling {
            gap: m,
            widths,
            verdict,
            fit,
            comparison,
        });
    }
    let report = ScalingReport {
        profile: cfg.profile_label(),
        depth: cfg.depth,
        cutoff: cfg.cutoff,
        order: cfg.order,
        theta_points: cfg.theta_points,
        eps,
        gaps: entries,
    };
    Ok(vec![Artifact {
        name: "scaling.json",
        contents: json(&report),
    }])
}

#[derive(Serialize)]
struct OracleRow {
    order: usize,
    absolute: f64,
    relative: f64,
}

#[derive(Serialize)]
struct OracleReport {
    profile: String,
    depth: f64,
    eps: f64,
    theta: f64,
    nx: usize,
    nz: usize,
    cutoff: usize,
    probe: Vec<(i64, f64, f64)>,
    oracle_norm: f64,
    residuals: Vec<OracleRow>,
    /// Residuals strictly decrease with order.
    monotone: bool,
}

pub fn validate_oracle(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let plan = cfg.oracle_plan()?;
    let oracle = apply_dno_oracle(&plan.profile, plan.theta, &plan.probe, plan.resolution)?;
    let norm = oracle.norm_l2();
    let residuals = (1..=MAX_ORDER)
        .map(|p| {
            let series = assemble_g_theta(&plan.profile, plan.theta, plan.probe.truncation(), p)?
                .apply(&plan.probe);
            let absolute = series.sub(&oracle).norm_l2();
            let relative = if norm > 0.0 {
                absolute / norm
            } else {
                absolute
            };
            Ok(OracleRow {
                order: p,
                absolute,
                relative,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let monotone = residuals.windows(2).all(|w| w[1].absolute < w[0].absolute);
    let trunc = plan.probe.truncation();
    let report = OracleReport {
        profile: cfg.profile_label(),
        depth: cfg.depth,
        eps: cfg.eps,
        theta: plan.theta,
        nx: plan.resolution.nx,
        nz: plan.resolution.nz,
        cutoff: trunc.cutoff(),
        probe: trunc
            .modes()
            .zip(plan.probe.coeffs())
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, c)| (k, c.re, c.im))
            .collect(),
        oracle_norm: norm,
        residuals,
        monotone,
    };
    Ok(vec![Artifact {
        name: "oracle.json",
        contents: json(&report),
    }])
}

pub fn evolve(cfg: &RunConfig) -> CliResult<Vec<Artifact>> {
    let plan = cfg.evolve_plan()?;
    let operator = assemble_g_theta(&plan.profile, plan.theta, plan.trunc, plan.order)?;
    let prop = BlochPropagator::new(operator)?;
    let state = WaveState::new(plan.eta, plan.eta_dot, plan.gravity)?;
    let e0 = prop.energy(&state);
    let m = plan.samples;
    let phases: Vec<Complex64> = (0..m)
        .map(|i| Complex64::from_polar(1.0, plan.theta * 2.0 * PI * i as f64 / m as f64))
        .collect();
    let mut header = vec!["t".to_string()];
    header.extend((0..m).map(|i| format!("re_{i}")));
    header.extend((0..m).map(|i| format!("im_{i}")));
    header.push("energy".into());
    let mut rows = Vec::with_capacity(plan.times.len());
    for &t in &plan.times {
        let out = prop.evolve(&state, t)?;
        let energy = prop.energy(&out);
        let drift = (energy - e0).abs() / e0.abs().max(f64::MIN_POSITIVE);
        if drift > ENERGY_TOL && (energy - e0).abs() > ENERGY_TOL {
            return Err(CliError::Invariant(Error::InvariantViolation(format!(
                "energy drifted by {drift:.3e} (relative) at t = {t}"
            ))));
        }
        let values: Vec<Complex64> = synthesize(&out.eta, m)?
            .iter()
            .zip(&phases)
            .map(|(v, p)| v * p)
            .collect();
        let mut row = vec![t];
        row.extend(values.iter().map(|v| v.re));
        row.extend(values.iter().map(|v| v.im));
        row.push(energy);
        rows.push(row);
    }
    Ok(vec![Artifact {
        name: "evolution.csv",
        contents: csv(&header, &rows),
    }])
}
