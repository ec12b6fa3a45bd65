use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smalleig_core::{
    assemble_with, dense_oracle, solve_smallest_with, CsrMatrix, MassKind, SolverOptions, SparsePencil,
};

use crate::config::RunConfig;
use crate::pipeline::{base_mesh, cover_mesh};

/// Eigenvalues compared per pencil.
pub const ORACLE_COUNT: usize = 6;
pub const ORACLE_MAX_DOF: usize = 500;
pub const RANDOM_PENCILS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCase {
    pub name: String,
    pub dof: usize,
    pub sparse: Vec<f64>,
    pub dense: Vec<f64>,
    /// Largest `|Δλ| / max(1, λ)`.
    pub max_scaled_error: f64,
    pub agrees: bool,
}

/// Weighted graph Laplacian stiffness with a diagonally dominant mass.
pub fn random_pencil(seed: u64, n: usize) -> SparsePencil {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kt = Vec::new();
    let mut bt = Vec::new();
    let edge = |kt: &mut Vec<_>, i: usize, j: usize, w: f64| {
        kt.extend([(i, i, w), (j, j, w), (i, j, -w), (j, i, -w)]);
    };
    for i in 0..n {
        let w = rng.random_range(0.1..2.0);
        edge(&mut kt, i, (i + 1) % n, w);
        let j = rng.random_range(0..n);
        if j != i {
            let w = rng.random_range(0.1..2.0);
            edge(&mut kt, i, j, w);
            let m = rng.random_range(0.0..0.2);
            bt.extend([(i, i, m), (j, j, m), (i, j, m), (j, i, m)]);
        }
        bt.push((i, i, rng.random_range(0.5..1.5)));
    }
    SparsePencil {
        stiffness: CsrMatrix::from_triplets(n, kt),
        mass: CsrMatrix::from_triplets(n, bt),
        mass_kind: MassKind::Consistent,
    }
}

pub fn compare(name: &str, pencil: &SparsePencil, tol: f64, seed: u64) -> Result<OracleCase> {
    let count = ORACLE_COUNT.min(pencil.dof());
    let sparse = solve_smallest_with(pencil, &SolverOptions::new(count).tol(tol).seed(seed))?.eigenvalues;
    let dense = dense_oracle(pencil, count)?.eigenvalues;
    let max_scaled_error =
        sparse.iter().zip(&dense).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max);
    Ok(OracleCase {
        name: name.to_string(),
        dof: pencil.dof(),
        sparse,
        dense,
        max_scaled_error,
        agrees: max_scaled_error <= 1e-8,
    })
}

/// Random pencils plus every pipeline mesh of at most [`ORACLE_MAX_DOF`] vertices.
pub fn oracle_cases(cfg: &RunConfig) -> Result<Vec<OracleCase>> {
    let mut cases = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..RANDOM_PENCILS {
        let n = rng.random_range(8..=ORACLE_MAX_DOF / 2);
        let pencil = random_pencil(cfg.seed.wrapping_add(i as u64), n);
        cases.push(compare(&format!("random-{i}"), &pencil, cfg.tol, cfg.seed)?);
    }
    for levels in 0..=cfg.refine {
        let base = base_mesh(cfg, levels)?;
        if base.surface.vertex_count() <= ORACLE_MAX_DOF {
            let pencil = assemble_with(&base.surface, cfg.mass)?;
            cases.push(compare(&format!("base-r{levels}"), &pencil, cfg.tol, cfg.seed)?);
        }
        let cover = cover_mesh(cfg, &base, 1)?;
        if cover.surface().vertex_count() <= ORACLE_MAX_DOF {
            let pencil = assemble_with(cover.surface(), cfg.mass)?;
            cases.push(compare(&format!("cover-n{}-N1-r{levels}", cfg.n), &pencil, cfg.tol, cfg.seed)?);
        }
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_pencils_are_valid() {
        let p = random_pencil(9, 40);
        assert!(p.stiffness.is_symmetric() && p.mass.is_symmetric());
        let ones = vec![1.0; 40];
        assert!(p.stiffness.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
        let case = compare("t", &p, 1e-10, 0).unwrap();
        assert!(case.agrees, "{case:?}");
    }
}
