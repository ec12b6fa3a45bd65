use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use smalleig_core::hypmesh::{write_cover, write_surface};
use smalleig_core::{assemble_with, solve_smallest_with, SolverOptions};

use crate::config::RunConfig;
use crate::oracle::{oracle_cases, OracleCase};
use crate::pipeline::{
    base_mesh, check_same_config, cover_mesh, epsilon_check, lambda_non_increasing, sweep_rows, EpsilonCheck,
    SweepRow,
};

pub const TOOL: &str = "smalleig";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Accepted range for successive-difference ratios of a second-order method.
pub const RATIO_RANGE: (f64, f64) = (2.5, 6.0);
pub const EPSILONS: [f64; 2] = [0.5, 0.1];

/// Result of a subcommand: whether every asserted inequality held, plus a summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub ok: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    /// Seconds since the Unix epoch; not part of any hash.
    pub timestamp: u64,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Envelope<T> {
    fn new(cfg: &RunConfig, body: T) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            config_hash: cfg.hash(),
            config: cfg.clone(),
            timestamp,
            body,
        }
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    Ok(&cfg.out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).with_context(|| format!("writing {}", path.display()))?;
    writeln!(w)?;
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r).with_context(|| format!("writing {}", path.display()))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuiltFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildBody {
    pub files: Vec<BuiltFile>,
}

/// Writes the refined base mesh and one cover mesh per `N`.
pub fn cmd_build(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let dir = out_dir(cfg)?;
    let base = base_mesh(cfg, cfg.refine)?;
    let s = &base.surface;
    let mut paths = Vec::new();

    let header = |area: f64, genus: i64, extra: Vec<String>| {
        let mut c = vec![
            format!("area {area:.16e}"),
            format!("genus {genus}"),
            format!("cuffs {} {} {}", cfg.cuffs[0], cfg.cuffs[1], cfg.cuffs[2]),
            format!(
                "applied twists {:.16e} {:.16e} {:.16e}",
                base.applied_twists[0], base.applied_twists[1], base.applied_twists[2]
            ),
            format!("subdivisions {} refine {}", cfg.subdivisions, cfg.refine),
            format!("config {}", cfg.hash()),
        ];
        c.extend(extra);
        c
    };

    let path = dir.join("base.hypmesh");
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    let comments = header(s.total_area(), s.genus(), vec![format!("gamma length {:.16e}", base.gamma.length())]);
    write_surface(&mut w, s, &comments, &[("gamma", &base.gamma)]).with_context(|| format!("writing {}", path.display()))?;
    w.flush()?;
    paths.push(path);

    for &big_n in &cfg.big_n {
        let cover = cover_mesh(cfg, &base, big_n)?;
        let cs = cover.surface();
        let path = dir.join(format!("cover_n{}_N{big_n}.hypmesh", cfg.n));
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        let comments = header(cs.total_area(), cs.genus(), vec![format!("n {} N {big_n} degree {}", cfg.n, cover.degree())]);
        write_cover(&mut w, &cover, &comments).with_context(|| format!("writing {}", path.display()))?;
        w.flush()?;
        paths.push(path);
    }

    let files = paths
        .iter()
        .map(|p| {
            Ok(BuiltFile {
                path: p.file_name().unwrap().to_string_lossy().into_owned(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = dir.join("build.json");
    write_json(&manifest, &Envelope::new(cfg, BuildBody { files }))?;
    paths.push(manifest);
    Ok(Outcome {
        ok: true,
        summary: format!("wrote {} meshes (base area {:.12}, genus {})", paths.len() - 1, s.total_area(), s.genus()),
        files: paths,
    })
}

/// CSV layout of a sweep row.
#[derive(Debug, Clone, Serialize)]
struct SweepCsv<'a> {
    config_hash: &'a str,
    n: usize,
    #[serde(rename = "N")]
    big_n: usize,
    d: usize,
    genus: i64,
    dof: usize,
    status: &'a str,
    eigenvalues: String,
    lambda_n: f64,
    h: f64,
    eta: f64,
    t: f64,
    bound: f64,
    conservative_bound: f64,
    certificate: f64,
    bound_holds: bool,
    certificate_holds: bool,
    paper_chain_assumptions_hold: bool,
    witness_length: f64,
    max_residual: f64,
}

pub const SWEEP_CSV_COLUMNS: &str = "config_hash, n, N, d, genus, dof, status, eigenvalues (λ_0..λ_{n+1}, \
    `;`-separated), lambda_n, h, eta, t, bound, conservative_bound, certificate, bound_holds, \
    certificate_holds, paper_chain_assumptions_hold, witness_length, max_residual";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepChecks {
    pub all_rows_ok: bool,
    pub all_bounds_hold: bool,
    pub all_certificates_hold: bool,
    pub lambda_n_non_increasing: bool,
    pub epsilon: Vec<EpsilonCheck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepBody {
    pub rows: Vec<SweepRow>,
    pub checks: SweepChecks,
}

pub fn sweep_checks(rows: &[SweepRow]) -> SweepChecks {
    SweepChecks {
        all_rows_ok: rows.iter().all(SweepRow::ok),
        all_bounds_hold: rows.iter().all(|r| r.bound_holds),
        all_certificates_hold: rows.iter().all(|r| r.certificate_holds),
        lambda_n_non_increasing: lambda_non_increasing(rows),
        epsilon: EPSILONS.iter().map(|&e| epsilon_check(rows, e)).collect(),
    }
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let rows = sweep_rows(cfg)?;
    let dir = out_dir(cfg)?;
    let checks = sweep_checks(&rows);
    let csv_rows: Vec<SweepCsv> = rows
        .iter()
        .map(|r| SweepCsv {
            config_hash: &r.config_hash,
            n: r.n,
            big_n: r.big_n,
            d: r.d,
            genus: r.genus,
            dof: r.dof,
            status: &r.status,
            eigenvalues: r.eigenvalues.iter().map(|l| format!("{l:.16e}")).collect::<Vec<_>>().join(";"),
            lambda_n: r.lambda_n,
            h: r.h,
            eta: r.eta,
            t: r.t,
            bound: r.bound,
            conservative_bound: r.conservative_bound,
            certificate: r.certificate,
            bound_holds: r.bound_holds,
            certificate_holds: r.certificate_holds,
            paper_chain_assumptions_hold: r.paper_chain_assumptions_hold,
            witness_length: r.witness_length,
            max_residual: r.max_residual,
        })
        .collect();
    let csv_path = dir.join("sweep.csv");
    let json_path = dir.join("sweep.json");
    write_csv(&csv_path, &csv_rows)?;
    let ok = checks.all_rows_ok && checks.all_bounds_hold && checks.all_certificates_hold && checks.lambda_n_non_increasing;
    let mut summary = String::new();
    for r in &rows {
        if r.ok() {
            summary += &format!(
                "N={:<3} d={:<3} genus={:<3} dof={:<6} lambda_{}={:.6e} bound={:.6e} certificate={:.6e}\n",
                r.big_n, r.d, r.genus, r.dof, r.n, r.lambda_n, r.bound, r.certificate
            );
        } else {
            summary += &format!("N={:<3} failed: {}\n", r.big_n, r.error.as_deref().unwrap_or("unknown"));
        }
    }
    for e in &checks.epsilon {
        match e.big_n {
            Some(n) => summary += &format!("epsilon {}: N={n}, measured below epsilon: {}\n", e.epsilon, e.reached),
            None => summary += &format!("epsilon {}: no N in the sweep has bound below it\n", e.epsilon),
        }
    }
    write_json(&json_path, &Envelope::new(cfg, SweepBody { rows, checks }))?;
    Ok(Outcome { ok, summary, files: vec![csv_path, json_path] })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergeLevel {
    pub level: usize,
    pub dof: usize,
    pub area: f64,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergeBody {
    pub levels: Vec<ConvergeLevel>,
    /// For each triple of consecutive levels ending at `level`, the ratios for `λ_1 … λ_4`.
    pub ratios: Vec<(usize, Vec<f64>)>,
    pub finest_ratios_in_range: bool,
    pub area_invariant: bool,
    pub constant_mode_ok: bool,
}

/// `(λ(a) − λ(b)) / (λ(b) − λ(c))` for each eigenvalue index `1..`.
pub fn difference_ratios(a: &[f64], b: &[f64], c: &[f64]) -> Vec<f64> {
    (1..a.len()).map(|k| (a[k] - b[k]) / (b[k] - c[k])).collect()
}

pub fn converge_study(cfg: &RunConfig) -> Result<ConvergeBody> {
    cfg.validate()?;
    if cfg.refine < 2 {
        bail!("convergence study needs refine >= 2, got {}", cfg.refine);
    }
    let mut levels = Vec::new();
    for level in 0..=cfg.refine {
        let base = base_mesh(cfg, level)?;
        let pencil = assemble_with(&base.surface, cfg.mass)?;
        let spec = solve_smallest_with(&pencil, &SolverOptions::new(5).tol(cfg.tol).seed(cfg.seed))?;
        levels.push(ConvergeLevel {
            level,
            dof: pencil.dof(),
            area: base.surface.total_area(),
            eigenvalues: spec.eigenvalues,
        });
    }
    let ratios: Vec<(usize, Vec<f64>)> = levels
        .windows(3)
        .map(|w| (w[2].level, difference_ratios(&w[0].eigenvalues, &w[1].eigenvalues, &w[2].eigenvalues)))
        .collect();
    let finest_ratios_in_range =
        ratios.last().is_some_and(|(_, r)| r.iter().all(|x| (RATIO_RANGE.0..=RATIO_RANGE.1).contains(x)));
    let area = 4.0 * std::f64::consts::PI * (base_mesh(cfg, 0)?.surface.genus() - 1) as f64;
    let area_invariant = levels.iter().all(|l| (l.area - area).abs() < 1e-8);
    let constant_mode_ok = levels.iter().all(|l| l.eigenvalues[0].abs() < 1e-8 * l.eigenvalues[1].max(1.0));
    Ok(ConvergeBody { levels, ratios, finest_ratios_in_range, area_invariant, constant_mode_ok })
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<Outcome> {
    let body = converge_study(cfg)?;
    let dir = out_dir(cfg)?;
    #[derive(Serialize)]
    struct Row {
        level: usize,
        dof: usize,
        area: f64,
        lambda_0: f64,
        lambda_1: f64,
        lambda_2: f64,
        lambda_3: f64,
        lambda_4: f64,
    }
    let rows: Vec<Row> = body
        .levels
        .iter()
        .map(|l| Row {
            level: l.level,
            dof: l.dof,
            area: l.area,
            lambda_0: l.eigenvalues[0],
            lambda_1: l.eigenvalues[1],
            lambda_2: l.eigenvalues[2],
            lambda_3: l.eigenvalues[3],
            lambda_4: l.eigenvalues[4],
        })
        .collect();
    let csv_path = dir.join("converge.csv");
    let json_path = dir.join("converge.json");
    write_csv(&csv_path, &rows)?;
    let mut summary = String::new();
    for (level, r) in &body.ratios {
        let flags: Vec<String> = r
            .iter()
            .map(|x| {
                let mark = if (RATIO_RANGE.0..=RATIO_RANGE.1).contains(x) { "" } else { " (out of range)" };
                format!("{x:.3}{mark}")
            })
            .collect();
        summary += &format!("ratios ending at level {level}: {}\n", flags.join(", "));
    }
    let ok = body.finest_ratios_in_range && body.area_invariant && body.constant_mode_ok;
    write_json(&json_path, &Envelope::new(cfg, body))?;
    Ok(Outcome { ok, summary, files: vec![csv_path, json_path] })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorollaryRow {
    #[serde(rename = "N")]
    pub big_n: usize,
    pub d: usize,
    pub genus: i64,
    pub witness_length: f64,
    pub lambda_n: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorollaryBody {
    pub rows: Vec<CorollaryRow>,
    pub ratio_strictly_decreasing: bool,
    pub note: String,
}

pub const COROLLARY_NOTE: &str = "witness_length is the total length (n+1)·l(γ) of the cutting \
    multicurve, an upper bound on l_n and not l_n itself. As N grows the genus grows linearly while \
    lambda_n / witness_length tends to 0, so no constant C_1 independent of the genus can give \
    lambda_n >= C_1 · l_n. The genus-dependent constants C_1(g), C_2(g) are not computed.";

/// Rows from `sweep.json` in the output directory when present, else a fresh sweep.
pub fn load_or_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let path = cfg.out.join("sweep.json");
    if path.exists() {
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let env: Envelope<SweepBody> =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let hash = check_same_config(&env.body.rows)?;
        if hash != cfg.hash() {
            bail!("{} was produced by config {hash}, current config is {}", path.display(), cfg.hash());
        }
        return Ok(env.body.rows);
    }
    sweep_rows(cfg)
}

pub fn corollary_rows(rows: &[SweepRow]) -> Result<CorollaryBody> {
    check_same_config(rows)?;
    let mut rows: Vec<&SweepRow> = rows.iter().filter(|r| r.ok()).collect();
    rows.sort_by_key(|r| r.big_n);
    let out: Vec<CorollaryRow> = rows
        .iter()
        .map(|r| CorollaryRow {
            big_n: r.big_n,
            d: r.d,
            genus: r.genus,
            witness_length: r.witness_length,
            lambda_n: r.lambda_n,
            ratio: r.witness_ratio(),
        })
        .collect();
    let ratio_strictly_decreasing = out.windows(2).all(|w| w[1].ratio < w[0].ratio);
    Ok(CorollaryBody { rows: out, ratio_strictly_decreasing, note: COROLLARY_NOTE.into() })
}

pub fn cmd_corollary(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let rows = load_or_sweep(cfg)?;
    let body = corollary_rows(&rows)?;
    let dir = out_dir(cfg)?;
    let csv_path = dir.join("corollary.csv");
    let json_path = dir.join("corollary.json");
    write_csv(&csv_path, &body.rows)?;
    let mut summary = String::new();
    for r in &body.rows {
        summary += &format!(
            "N={:<3} genus={:<3} witness={:.6} lambda_n={:.6e} ratio={:.6e}\n",
            r.big_n, r.genus, r.witness_length, r.lambda_n, r.ratio
        );
    }
    summary += COROLLARY_NOTE;
    summary.push('\n');
    let ok = body.ratio_strictly_decreasing;
    write_json(&json_path, &Envelope::new(cfg, body))?;
    Ok(Outcome { ok, summary, files: vec![csv_path, json_path] })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleBody {
    pub cases: Vec<OracleCase>,
    pub all_agree: bool,
}

pub fn cmd_oracle_check(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let cases = oracle_cases(cfg)?;
    let dir = out_dir(cfg)?;
    let all_agree = cases.iter().all(|c| c.agrees);
    let mut summary = String::new();
    for c in &cases {
        summary += &format!("{:<18} dof={:<4} max scaled error {:.3e}\n", c.name, c.dof, c.max_scaled_error);
    }
    let json_path = dir.join("oracle.json");
    write_json(&json_path, &Envelope::new(cfg, OracleBody { cases, all_agree }))?;
    Ok(Outcome { ok: all_agree, summary, files: vec![json_path] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dir: &Path) -> RunConfig {
        RunConfig { refine: 0, big_n: vec![1, 2], out: dir.to_path_buf(), ..RunConfig::default() }
    }

    #[test]
    fn build_is_byte_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let oa = cmd_build(&cfg(a.path())).unwrap();
        let ob = cmd_build(&cfg(b.path())).unwrap();
        for (x, y) in oa.files.iter().zip(&ob.files) {
            if x.extension().is_some_and(|e| e == "hypmesh") {
                assert_eq!(sha256_file(x).unwrap(), sha256_file(y).unwrap());
            }
        }
        let cover = std::fs::read_to_string(a.path().join("cover_n2_N2.hypmesh")).unwrap();
        assert!(cover.contains("\nDECK 6\n"));
        let base = std::fs::read_to_string(a.path().join("base.hypmesh")).unwrap();
        assert!(base.contains("# area 1.2566370614359"));
    }

    #[test]
    fn sweep_json_is_stable_apart_from_timestamp() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(cmd_sweep(&cfg(a.path())).unwrap().ok);
        assert!(cmd_sweep(&cfg(b.path())).unwrap().ok);
        let strip = |p: &Path| {
            let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
            v.as_object_mut().unwrap().remove("timestamp");
            v["config"].as_object_mut().unwrap().remove("out");
            v
        };
        assert_eq!(strip(&a.path().join("sweep.json")), strip(&b.path().join("sweep.json")));
        assert_eq!(
            std::fs::read(a.path().join("sweep.csv")).unwrap(),
            std::fs::read(b.path().join("sweep.csv")).unwrap()
        );
        // corollary reuses the stored sweep, and refuses one from another config
        assert!(cmd_corollary(&cfg(a.path())).unwrap().ok);
        let other = RunConfig { seed: 5, ..cfg(a.path()) };
        assert!(cmd_corollary(&other).is_err());
    }

    #[test]
    fn converge_requires_two_levels() {
        let dir = tempfile::tempdir().unwrap();
        assert!(cmd_converge(&RunConfig { refine: 1, ..cfg(dir.path()) }).is_err());
        assert_eq!(difference_ratios(&[0.0, 7.0], &[0.0, 3.0], &[0.0, 2.0]), vec![4.0]);
    }
}
