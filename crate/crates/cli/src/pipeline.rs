use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smalleig_core::fem::refine_levels;
use smalleig_core::{
    assemble_with, bound_report, build_surface, cyclic_cover, solve_smallest_with, BoundReport, CoverSurface,
    MeshCurve, SolverOptions, SparsePencil, TriangulatedSurface,
};

use crate::config::RunConfig;

/// Relative slack allowed when checking that `λ_n` does not increase with `N`.
pub const MONOTONE_SLACK: f64 = 0.02;

/// Base surface refined to the configured level, with its designated curve.
#[derive(Debug, Clone)]
pub struct BaseMesh {
    pub surface: TriangulatedSurface,
    pub gamma: MeshCurve,
    pub applied_twists: [f64; 3],
}

pub fn base_mesh(cfg: &RunConfig, levels: usize) -> Result<BaseMesh> {
    let built = build_surface(&cfg.spec())?;
    let (surface, curves) = refine_levels(&built.surface, &[built.gamma], levels)?;
    Ok(BaseMesh { surface, gamma: curves.into_iter().next().expect("one curve"), applied_twists: built.applied_twists })
}

pub fn cover_mesh(cfg: &RunConfig, base: &BaseMesh, big_n: usize) -> Result<CoverSurface> {
    Ok(cyclic_cover(&base.surface, &base.gamma, cfg.n, big_n)?)
}

/// One row of a sweep over `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config_hash: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub status: String,
    pub error: Option<String>,
    pub d: usize,
    pub genus: i64,
    pub dof: usize,
    pub eigenvalues: Vec<f64>,
    #[serde(deserialize_with = "nan_if_null")]
    pub max_residual: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub lambda_n: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub h: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub eta: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub t: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub bound: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub conservative_bound: f64,
    #[serde(deserialize_with = "nan_if_null")]
    pub certificate: f64,
    pub bound_holds: bool,
    pub certificate_holds: bool,
    pub paper_chain_assumptions_hold: bool,
    #[serde(deserialize_with = "nan_if_null")]
    pub witness_length: f64,
    pub report: Option<BoundReport>,
}

/// Failed rows carry NaN, which JSON writes as `null`.
fn nan_if_null<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl SweepRow {
    fn failed(cfg: &RunConfig, big_n: usize, err: anyhow::Error) -> Self {
        Self {
            config_hash: cfg.hash(),
            n: cfg.n,
            big_n,
            status: "failed".into(),
            error: Some(format!("{err:#}")),
            d: (cfg.n + 1) * big_n,
            genus: 0,
            dof: 0,
            eigenvalues: Vec::new(),
            max_residual: f64::NAN,
            lambda_n: f64::NAN,
            h: f64::NAN,
            eta: f64::NAN,
            t: f64::NAN,
            bound: f64::NAN,
            conservative_bound: f64::NAN,
            certificate: f64::NAN,
            bound_holds: false,
            certificate_holds: false,
            paper_chain_assumptions_hold: false,
            witness_length: f64::NAN,
            report: None,
        }
    }

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    /// `λ_n` divided by the witness multicurve length.
    pub fn witness_ratio(&self) -> f64 {
        self.lambda_n / self.witness_length
    }
}

pub fn pencil_for(cfg: &RunConfig, cover: &CoverSurface) -> Result<SparsePencil> {
    Ok(assemble_with(cover.surface(), cfg.mass)?)
}

fn compute_row(cfg: &RunConfig, base: &BaseMesh, big_n: usize) -> Result<SweepRow> {
    let cover = cover_mesh(cfg, base, big_n)?;
    let pencil = pencil_for(cfg, &cover)?;
    let opts = SolverOptions::new(cfg.n + 2).tol(cfg.tol).seed(cfg.seed);
    let spectrum = solve_smallest_with(&pencil, &opts)?;
    let report = bound_report(&cover, &pencil, &spectrum, cfg.testfn)?;
    Ok(SweepRow {
        config_hash: cfg.hash(),
        n: cfg.n,
        big_n,
        status: "ok".into(),
        error: None,
        d: cover.degree(),
        genus: report.genus,
        dof: pencil.dof(),
        eigenvalues: spectrum.eigenvalues.clone(),
        max_residual: spectrum.max_residual(),
        lambda_n: report.lambda_n,
        h: report.h,
        eta: report.eta,
        t: report.t,
        bound: report.bound,
        conservative_bound: report.conservative_bound,
        certificate: report.certificate,
        bound_holds: report.bound_holds,
        certificate_holds: report.certificate_holds,
        paper_chain_assumptions_hold: report.paper_chain_assumptions_hold,
        witness_length: report.witness_length,
        report: Some(report),
    })
}

/// Rows for every configured `N`, computed in parallel and returned in input order.
pub fn sweep_rows(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let base = base_mesh(cfg, cfg.refine)?;
    Ok(cfg
        .big_n
        .par_iter()
        .map(|&big_n| compute_row(cfg, &base, big_n).unwrap_or_else(|e| SweepRow::failed(cfg, big_n, e)))
        .collect())
}

/// Refuses to combine rows produced under different configurations.
pub fn check_same_config(rows: &[SweepRow]) -> Result<String> {
    let Some(first) = rows.first() else { bail!("no rows to aggregate") };
    if let Some(other) = rows.iter().find(|r| r.config_hash != first.config_hash) {
        bail!(
            "rows from different configurations cannot be aggregated ({} vs {})",
            first.config_hash,
            other.config_hash
        );
    }
    Ok(first.config_hash.clone())
}

/// True when `λ_n` never grows by more than the slack as `N` increases.
pub fn lambda_non_increasing(rows: &[SweepRow]) -> bool {
    let mut sorted: Vec<&SweepRow> = rows.iter().filter(|r| r.ok()).collect();
    sorted.sort_by_key(|r| r.big_n);
    sorted.windows(2).all(|w| w[1].lambda_n <= w[0].lambda_n * (1.0 + MONOTONE_SLACK))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCheck {
    pub epsilon: f64,
    /// Smallest `N` whose bound is below `epsilon`.
    #[serde(rename = "N")]
    pub big_n: Option<usize>,
    pub bound: Option<f64>,
    pub lambda_n: Option<f64>,
    pub reached: bool,
}

pub fn epsilon_check(rows: &[SweepRow], epsilon: f64) -> EpsilonCheck {
    let mut sorted: Vec<&SweepRow> = rows.iter().filter(|r| r.ok()).collect();
    sorted.sort_by_key(|r| r.big_n);
    match sorted.into_iter().find(|r| r.bound < epsilon) {
        Some(r) => EpsilonCheck {
            epsilon,
            big_n: Some(r.big_n),
            bound: Some(r.bound),
            lambda_n: Some(r.lambda_n),
            reached: r.lambda_n < epsilon,
        },
        None => EpsilonCheck { epsilon, big_n: None, bound: None, lambda_n: None, reached: false },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig { refine: 0, big_n: vec![1, 2], ..RunConfig::default() }
    }

    #[test]
    fn rows_come_back_in_order_with_hash() {
        let cfg = small();
        let rows = sweep_rows(&cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.big_n).collect::<Vec<_>>(), vec![1, 2]);
        assert!(rows.iter().all(|r| r.ok() && r.config_hash == cfg.hash()));
        assert!((rows[0].h - 2.0 * rows[1].h).abs() < 1e-15);
        assert_eq!(check_same_config(&rows).unwrap(), cfg.hash());
        assert!(lambda_non_increasing(&rows));
    }

    #[test]
    fn mixed_configs_are_rejected() {
        let a = sweep_rows(&RunConfig { big_n: vec![1], ..small() }).unwrap();
        let b = sweep_rows(&RunConfig { big_n: vec![1], seed: 3, ..small() }).unwrap();
        let mixed: Vec<SweepRow> = a.into_iter().chain(b).collect();
        assert!(check_same_config(&mixed).is_err());
        assert!(check_same_config(&[]).is_err());
    }

    #[test]
    fn epsilon_search_picks_smallest_n() {
        let rows = sweep_rows(&RunConfig { big_n: vec![1, 2, 4], ..small() }).unwrap();
        let e = epsilon_check(&rows, 0.5);
        assert_eq!(e.big_n, Some(4));
        assert!(e.reached);
        assert!(!epsilon_check(&rows, 1e-6).reached);
    }
}
