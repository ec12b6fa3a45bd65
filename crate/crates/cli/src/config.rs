use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use smalleig_core::{FenchelNielsenSpec, MassKind, TestFunctionVariant};

/// Parameters shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub cuffs: [f64; 3],
    pub twists: [i64; 3],
    pub subdivisions: usize,
    pub refine: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: Vec<usize>,
    pub tol: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub mass: MassKind,
    pub testfn: TestFunctionVariant,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cuffs: [2.0; 3],
            twists: [0; 3],
            subdivisions: 8,
            refine: 2,
            n: 2,
            big_n: vec![1, 2, 4, 8],
            tol: 1e-9,
            out: PathBuf::from("out"),
            seed: 0,
            mass: MassKind::Consistent,
            testfn: TestFunctionVariant::Corrected,
        }
    }
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| anyhow::anyhow!("bad entry `{}` for `{key}`", v.trim())))
        .collect()
}

fn triple<T: std::str::FromStr + Copy>(key: &str, value: &str) -> Result<[T; 3]> {
    let v = list(key, value)?;
    match v.as_slice() {
        [a] => Ok([*a; 3]),
        [a, b, c] => Ok([*a, *b, *c]),
        _ => bail!("`{key}` takes one or three values"),
    }
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| anyhow::anyhow!("bad value `{value}` for `{key}`"))
}

impl RunConfig {
    /// Sets one `key = value` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "cuffs" => self.cuffs = triple(key, value)?,
            "twists" => self.twists = triple(key, value)?,
            "m" | "subdivisions" => self.subdivisions = scalar(key, value)?,
            "refine" | "r" => self.refine = scalar(key, value)?,
            "n" => self.n = scalar(key, value)?,
            "N" => self.big_n = list(key, value)?,
            "tol" => self.tol = scalar(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = scalar(key, value)?,
            "mass" => self.mass = value.parse().map_err(anyhow::Error::msg)?,
            "testfn" => self.testfn = value.parse().map_err(anyhow::Error::msg)?,
            other => bail!("unknown config key `{other}`"),
        }
        Ok(())
    }

    /// Applies a `key = value` file; `#` starts a comment.
    pub fn load(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected `key = value`", path.display(), i + 1))?;
            self.set(k, v).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.subdivisions < 4 {
            bail!("m must be at least 4, got {}", self.subdivisions);
        }
        if self.n < 1 {
            bail!("n must be at least 1");
        }
        if self.big_n.is_empty() || self.big_n.contains(&0) {
            bail!("N values must be a non-empty list of positive integers");
        }
        if !(self.tol > 0.0) {
            bail!("tol must be positive, got {}", self.tol);
        }
        if self.cuffs.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            bail!("cuff lengths must be positive, got {:?}", self.cuffs);
        }
        self.spec().validate()?;
        Ok(())
    }

    pub fn spec(&self) -> FenchelNielsenSpec {
        FenchelNielsenSpec { cuffs: self.cuffs, twists: self.twists, subdivisions: self.subdivisions }
    }

    /// SHA-256 of every field that affects results (the output directory does not).
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out = PathBuf::new();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# sweep\ncuffs = 2, 2.5, 3\nN = 1, 2\nmass = lumped  # cheap\nrefine=1\n").unwrap();
        let mut c = RunConfig::default();
        c.load(&path).unwrap();
        assert_eq!(c.cuffs, [2.0, 2.5, 3.0]);
        assert_eq!(c.big_n, vec![1, 2]);
        assert_eq!(c.mass, MassKind::Lumped);
        assert_eq!(c.refine, 1);
        c.set("N", "4").unwrap();
        assert_eq!(c.big_n, vec![4]);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = RunConfig::default();
        assert!(c.set("colour", "red").is_err());
        assert!(c.set("tol", "abc").is_err());
        assert!(c.set("testfn", "other").is_err());
        c.subdivisions = 3;
        assert!(c.validate().is_err());
        let c = RunConfig { big_n: vec![0], ..RunConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn hash_ignores_output_directory() {
        let a = RunConfig::default();
        let b = RunConfig { out: PathBuf::from("elsewhere"), ..RunConfig::default() };
        let c = RunConfig { seed: 1, ..RunConfig::default() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
