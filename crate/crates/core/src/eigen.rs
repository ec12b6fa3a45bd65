//! Smallest eigenpairs of the pencil `K v = λ B v`.
//!
//! The sparse solver runs a block Krylov iteration on `(K − σB)⁻¹B` in the
//! `B` inner product with a fixed negative shift `σ`, extracting Ritz pairs
//! from `K` on the Krylov basis and restarting from the best Ritz vectors.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::SparsePencil;
use crate::sparse::EnvelopeCholesky;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DENSE_LIMIT: usize = 2000;
/// Shift as a multiple of the pencil scale.
pub const SHIFT_FACTOR: f64 = -1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    /// `B`-orthonormal eigenvectors, one per eigenvalue.
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub tolerance: f64,
    pub shift: f64,
    pub dof: usize,
}

impl SpectrumResult {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub count: usize,
    pub tol: f64,
    pub seed: u64,
    pub max_restarts: usize,
}

impl SolverOptions {
    pub fn new(count: usize) -> Self {
        Self { count, tol: DEFAULT_TOL, seed: 0, max_restarts: 300 }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Relative residual `‖Kx − λBx‖ / (‖Kx‖ + (|λ| + |σ|)‖Bx‖)`.
pub fn relative_residual(kx: &[f64], bx: &[f64], lambda: f64, shift: f64) -> f64 {
    let num = kx.iter().zip(bx).map(|(k, b)| (k - lambda * b).powi(2)).sum::<f64>().sqrt();
    let den = norm(kx) + (lambda.abs() + shift.abs()) * norm(bx);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn solve_smallest(pencil: &SparsePencil, count: usize, tol: f64) -> Result<SpectrumResult> {
    solve_smallest_with(pencil, &SolverOptions::new(count).tol(tol))
}

pub fn solve_smallest_with(pencil: &SparsePencil, opts: &SolverOptions) -> Result<SpectrumResult> {
    let n = pencil.dof();
    let count = opts.count;
    if count == 0 || count > n {
        return Err(Error::InvalidInput(format!("cannot compute {count} eigenpairs of a {n}-dof pencil")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let k = &pencil.stiffness;
    let b = &pencil.mass;
    let shift = SHIFT_FACTOR * pencil.scale();
    let shifted = k.add_scaled(-shift, b);
    let chol = EnvelopeCholesky::factor(&shifted)?;

    let p = (count + 2).min(n);
    let m_max = n.min((5 * p).max(40));
    let keep = (m_max / 2).max(p).min(m_max - 1).max(count);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis = Basis::default();

    let start: Vec<Vec<f64>> = (0..p).map(|_| random_vector(&mut rng, n)).collect();
    let mut block = basis.extend(start, pencil, &mut rng);
    let mut best = vec![f64::INFINITY; count];
    for iteration in 1..=opts.max_restarts {
        while basis.len() < m_max && !block.is_empty() {
            let room = m_max - basis.len();
            let next: Vec<Vec<f64>> =
                block.iter().take(room).map(|&j| chol.solve(&b.mul_vec(&basis.v[j]))).collect();
            block = basis.extend(next, pencil, &mut rng);
        }
        let ritz = basis.rayleigh_ritz(keep);
        let residuals: Vec<f64> = (0..count)
            .map(|j| relative_residual(&ritz.kv[j], &ritz.bv[j], ritz.values[j], shift))
            .collect();
        for (b, r) in best.iter_mut().zip(&residuals) {
            *b = r.min(*b);
        }
        let exhausted = basis.len() == n;
        if residuals.iter().all(|&r| r <= opts.tol) || exhausted {
            let mut vectors = ritz.v;
            vectors.truncate(count);
            for v in &mut vectors {
                fix_sign(v);
            }
            return Ok(SpectrumResult {
                eigenvalues: ritz.values[..count].to_vec(),
                eigenvectors: vectors,
                residuals,
                iterations: iteration,
                tolerance: opts.tol,
                shift,
                dof: n,
            });
        }
        basis = Basis { v: ritz.v, kv: ritz.kv, bv: ritz.bv };
        block = (0..p.min(basis.len())).collect();
    }
    Err(Error::NotConverged { iterations: opts.max_restarts, residuals: best })
}

/// Dense whitened solve `L⁻¹KL⁻ᵀ` with `B = LLᵀ`, for small pencils only.
pub fn dense_oracle(pencil: &SparsePencil, count: usize) -> Result<SpectrumResult> {
    let n = pencil.dof();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: DENSE_LIMIT });
    }
    if count == 0 || count > n {
        return Err(Error::InvalidInput(format!("cannot compute {count} eigenpairs of a {n}-dof pencil")));
    }
    let to_dense = |m: &crate::sparse::CsrMatrix| {
        let d = m.to_dense();
        DMatrix::from_fn(n, n, |i, j| d[i][j])
    };
    let kd = to_dense(&pencil.stiffness);
    let bd = to_dense(&pencil.mass);
    let l = bd
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("mass matrix is not positive definite".into()))?
        .l();
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::InvalidInput("singular mass factor".into()))?;
    let mut c = &linv * &kd * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let shift = SHIFT_FACTOR * pencil.scale();
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for &j in order.iter().take(count) {
        let x = linv.transpose() * eig.eigenvectors.column(j);
        let mut x: Vec<f64> = x.iter().copied().collect();
        fix_sign(&mut x);
        let lambda = eig.eigenvalues[j];
        residuals.push(relative_residual(
            &pencil.stiffness.mul_vec(&x),
            &pencil.mass.mul_vec(&x),
            lambda,
            shift,
        ));
        values.push(lambda);
        vectors.push(x);
    }
    Ok(SpectrumResult {
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
        iterations: 1,
        tolerance: 0.0,
        shift,
        dof: n,
    })
}

#[derive(Default)]
struct Basis {
    v: Vec<Vec<f64>>,
    kv: Vec<Vec<f64>>,
    bv: Vec<Vec<f64>>,
}

struct Ritz {
    values: Vec<f64>,
    v: Vec<Vec<f64>>,
    kv: Vec<Vec<f64>>,
    bv: Vec<Vec<f64>>,
}

impl Basis {
    fn len(&self) -> usize {
        self.v.len()
    }

    /// B-orthonormalizes `candidates` against the basis and appends the
    /// survivors, returning their indices. Dependent candidates are replaced
    /// by random vectors, and dropped when the space is exhausted.
    fn extend(&mut self, candidates: Vec<Vec<f64>>, pencil: &SparsePencil, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let n = pencil.dof();
        let mut added = Vec::new();
        for w in candidates {
            let mut w = w;
            for attempt in 0..4 {
                if self.len() >= n {
                    break;
                }
                let before = (dot(&w, &pencil.mass.mul_vec(&w))).sqrt();
                for _ in 0..2 {
                    for (v, bv) in self.v.iter().zip(&self.bv) {
                        let c = dot(bv, &w);
                        axpy(-c, v, &mut w);
                    }
                }
                let bw = pencil.mass.mul_vec(&w);
                let after = dot(&w, &bw).sqrt();
                if after > 1e-10 * before && after > 0.0 {
                    let s = 1.0 / after;
                    w.iter_mut().for_each(|x| *x *= s);
                    let bw: Vec<f64> = bw.iter().map(|x| x * s).collect();
                    self.kv.push(pencil.stiffness.mul_vec(&w));
                    self.bv.push(bw);
                    self.v.push(w);
                    added.push(self.len() - 1);
                    break;
                }
                if attempt < 3 {
                    w = random_vector(rng, n);
                }
            }
        }
        added
    }

    /// Ritz pairs of `K` on the basis, ascending, keeping the first `keep`.
    fn rayleigh_ritz(&self, keep: usize) -> Ritz {
        let m = self.len();
        let mut h = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let x = 0.5 * (dot(&self.v[i], &self.kv[j]) + dot(&self.v[j], &self.kv[i]));
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let keep = keep.min(m);
        let combine = |cols: &[Vec<f64>], j: usize| {
            let mut out = vec![0.0; cols[0].len()];
            for (i, c) in cols.iter().enumerate() {
                axpy(eig.eigenvectors[(i, j)], c, &mut out);
            }
            out
        };
        let mut r = Ritz { values: Vec::new(), v: Vec::new(), kv: Vec::new(), bv: Vec::new() };
        for &j in order.iter().take(keep) {
            r.values.push(eig.eigenvalues[j]);
            r.v.push(combine(&self.v, j));
            r.kv.push(combine(&self.kv, j));
            r.bv.push(combine(&self.bv, j));
        }
        r
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Makes the entry of largest magnitude positive.
fn fix_sign(v: &mut [f64]) {
    let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, refine_levels, MassKind};
    use crate::sparse::CsrMatrix;
    use crate::surface::{build_surface, FenchelNielsenSpec};

    fn pencil(k: CsrMatrix, b: CsrMatrix) -> SparsePencil {
        SparsePencil { stiffness: k, mass: b, mass_kind: MassKind::Consistent }
    }

    fn random_pencil(seed: u64, n: usize) -> SparsePencil {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut kt = Vec::new();
        let mut bt = Vec::new();
        for i in 0..n {
            bt.push((i, i, rng.random_range(0.5..1.5)));
            let j = (i + 1) % n;
            let w = rng.random_range(0.1..2.0);
            kt.extend([(i, i, w), (j, j, w), (i, j, -w), (j, i, -w)]);
            for _ in 0..2 {
                let j = rng.random_range(0..n);
                if j != i {
                    let w = rng.random_range(0.1..2.0);
                    kt.extend([(i, i, w), (j, j, w), (i, j, -w), (j, i, -w)]);
                    let m = rng.random_range(0.0..0.1);
                    bt.extend([(i, i, m), (j, j, m), (i, j, m), (j, i, m)]);
                }
            }
        }
        pencil(CsrMatrix::from_triplets(n, kt), CsrMatrix::from_triplets(n, bt))
    }

    #[test]
    fn hand_pencil() {
        let p = pencil(CsrMatrix::from_dense(&[vec![1.0, -1.0], vec![-1.0, 1.0]]), CsrMatrix::identity(2));
        let d = dense_oracle(&p, 2).unwrap();
        assert!(d.eigenvalues[0].abs() < 1e-14 && (d.eigenvalues[1] - 2.0).abs() < 1e-14);
        let s = solve_smallest(&p, 2, 1e-12).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-14 && (s.eigenvalues[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_stiffness_gives_zero_spectrum() {
        let r = random_pencil(1, 12);
        let p = pencil(CsrMatrix::from_triplets(12, vec![]), r.mass);
        let d = dense_oracle(&p, 12).unwrap();
        assert!(d.eigenvalues.iter().all(|l| l.abs() < 1e-12));
    }

    #[test]
    fn sparse_matches_dense_on_random_pencils() {
        for seed in 0..20 {
            let n = 8 + 7 * seed as usize;
            let p = random_pencil(seed, n);
            let count = 6.min(n);
            let s = solve_smallest_with(&p, &SolverOptions::new(count).tol(1e-11).seed(seed)).unwrap();
            let d = dense_oracle(&p, count).unwrap();
            for (a, b) in s.eigenvalues.iter().zip(&d.eigenvalues) {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "seed {seed}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn base_surface_spectrum_matches_oracle_and_contracts() {
        let built = build_surface(&FenchelNielsenSpec::default()).unwrap();
        let (s, _) = refine_levels(&built.surface, &[], 1).unwrap();
        let p = assemble(&s).unwrap();
        let sp = solve_smallest(&p, 6, DEFAULT_TOL).unwrap();
        let d = dense_oracle(&p, 6).unwrap();
        for (a, b) in sp.eigenvalues.iter().zip(&d.eigenvalues) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
        }
        assert!(sp.eigenvalues[0] >= -1e-10 && sp.eigenvalues[0].abs() <= 1e-8 * p.scale());
        assert!(sp.residuals.iter().all(|&r| r <= DEFAULT_TOL));
        for i in 0..6 {
            for j in 0..6 {
                let g = p.mass.bilinear(&sp.eigenvectors[i], &sp.eigenvectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8);
            }
        }
        // constant mode
        let v0 = &sp.eigenvectors[0];
        let c = v0[0];
        assert!(v0.iter().all(|x| (x - c).abs() < 1e-6 * c.abs()));
    }

    #[test]
    fn solver_is_deterministic_and_rejects_bad_input() {
        let p = random_pencil(4, 30);
        let a = solve_smallest(&p, 3, 1e-10).unwrap();
        let b = solve_smallest(&p, 3, 1e-10).unwrap();
        assert_eq!(a, b);
        assert!(solve_smallest(&p, 0, 1e-9).is_err());
        assert!(solve_smallest(&p, 31, 1e-9).is_err());
        let big = pencil(CsrMatrix::identity(DENSE_LIMIT + 1), CsrMatrix::identity(DENSE_LIMIT + 1));
        assert!(matches!(dense_oracle(&big, 1), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn scaling_mass_divides_eigenvalues() {
        let p = random_pencil(7, 25);
        let a = dense_oracle(&p, 5).unwrap();
        let b = dense_oracle(&p.with_scaled_mass(3.0), 5).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x / 3.0 - y).abs() < 1e-12 * x.abs().max(1.0));
        }
    }
}
