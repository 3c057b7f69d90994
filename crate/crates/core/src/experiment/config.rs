//! TOML experiment configuration.
//!
//! ```toml
//! kind = "recover"        # recover | discretize | eig-check | concentration | sweep
//! seed = 42
//! trials = 200
//! r = 2.0
//! n = 1000                # or n_grid = [256, 512, ...] for sweeps
//! truncation = 2048       # optional working truncation for exact errors
//!
//! [kernel]
//! basis = "fourier"       # fourier | cosine
//! rule = "polynomial"     # polynomial | sobolev | geometric | finite
//! s = 1.0
//! atom_mass = 0.0
//!
//! [density]
//! kind = "head-tail"  # plain | head-tail | nonsep | trace-normalized
//!
//! [m_rule]
//! rule = "log-ratio"      # log-ratio | explicit (m = ..) | max-spectral (c = ..)
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{choose_m, max_m_under_spectral};
use crate::concentration::VectorFamily;
use crate::density::DensityKind;
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, SpectralKernelModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Recover,
    Discretize,
    EigCheck,
    Concentration,
    Sweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Recover => "recover",
            ExperimentKind::Discretize => "discretize",
            ExperimentKind::EigCheck => "eig-check",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MRule {
    Explicit { m: usize },
    /// `m = floor(n / (14 r log n))`.
    LogRatio,
    /// Largest `m` with `N(m) <= n / (c r log n)`.
    MaxSpectral { c: f64 },
}

impl Default for MRule {
    fn default() -> Self {
        MRule::LogRatio
    }
}

impl MRule {
    /// Resolve `m` for a given sample size; `0` when no admissible `m >= 2` exists.
    pub fn resolve(&self, model: &SpectralKernelModel, n: usize, r: f64) -> Result<usize> {
        match *self {
            MRule::Explicit { m } => Ok(m),
            MRule::LogRatio => choose_m(n, r),
            MRule::MaxSpectral { c } => Ok(max_m_under_spectral(model, n, r, c)?.unwrap_or(0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub kind: DensityKind,
}

impl Default for DensitySpec {
    fn default() -> Self {
        Self {
            kind: DensityKind::Plain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationSpec {
    #[serde(flatten)]
    pub family: VectorFamily,
    /// Declared bound `M`; defaults to the family's exact supremum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<f64>,
    #[serde(default = "default_t_points")]
    pub t_points: usize,
}

fn default_t_points() -> usize {
    10
}

fn default_chernoff_t() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    pub seed: u64,
    pub trials: usize,
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    /// Working truncation `N` for exact worst-case errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Deviation `t` for the eigenvalue tail report of `eig-check`.
    #[serde(default = "default_chernoff_t")]
    pub chernoff_t: f64,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub density: DensitySpec,
    #[serde(default)]
    pub m_rule: MRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration: Option<ConcentrationSpec>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .map(|s| locate_key(text, s.start))
                .unwrap_or_else(|| "<root>".into());
            Error::config(path, e.message().to_string())
        })?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn kind(&self) -> Result<ExperimentKind> {
        self.kind.ok_or_else(|| Error::config("kind", "experiment kind is not set"))
    }

    /// Check every invariant, reporting the offending field path.
    pub fn validate(&self) -> Result<()> {
        let kind = self.kind()?;
        if !(self.r > 1.0) {
            return Err(Error::config("r", format!("r must exceed 1, got {}", self.r)));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "at least one trial is required"));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "thread count must be positive"));
        }
        if self.truncation == Some(0) {
            return Err(Error::config("truncation", "truncation must be positive"));
        }
        match kind {
            ExperimentKind::Sweep => {
                let grid = self
                    .n_grid
                    .as_ref()
                    .ok_or_else(|| Error::config("n_grid", "sweeps need an n_grid"))?;
                if grid.len() < 4 {
                    return Err(Error::config(
                        "n_grid",
                        format!("sweeps need at least 4 grid points, got {}", grid.len()),
                    ));
                }
                if let Some((i, n)) = grid.iter().enumerate().find(|(_, &n)| n < 3) {
                    return Err(Error::config(format!("n_grid[{i}]"), format!("n must be >= 3, got {n}")));
                }
            }
            _ => {
                let n = self.n.ok_or_else(|| Error::config("n", "sample size is required"))?;
                if n < 3 {
                    return Err(Error::config("n", format!("n must be >= 3, got {n}")));
                }
            }
        }
        if kind == ExperimentKind::Concentration && self.concentration.is_none() {
            return Err(Error::config("concentration", "vector family is required"));
        }
        if let MRule::Explicit { m } = self.m_rule {
            if m < 2 && matches!(kind, ExperimentKind::Recover | ExperimentKind::EigCheck) {
                return Err(Error::config("m_rule.m", format!("m must be >= 2, got {m}")));
            }
        }
        if !(self.chernoff_t > 0.0 && self.chernoff_t < 1.0) {
            return Err(Error::config("chernoff_t", "must lie in (0, 1)"));
        }
        self.kernel
            .build()
            .map_err(|e| Error::config("kernel", e.to_string()))?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form (keys sorted).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("json value serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Dotted path of the innermost key whose line contains `offset`.
fn locate_key(text: &str, offset: usize) -> String {
    let mut table = String::new();
    let mut key = String::new();
    let mut pos = 0;
    for line in text.lines() {
        let end = pos + line.len();
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            table = trimmed.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            key.clear();
        } else if let Some((k, _)) = trimmed.split_once('=') {
            key = k.trim().to_string();
        }
        if offset <= end {
            break;
        }
        pos = end + 1;
    }
    match (table.is_empty(), key.is_empty()) {
        (true, true) => "<root>".into(),
        (true, false) => key,
        (false, true) => table,
        (false, false) => format!("{table}.{key}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
kind = "recover"
seed = 1
trials = 3
r = 2.0
n = 100

[kernel]
basis = "fourier"
rule = "polynomial"
s = 1.0
"#;

    #[test]
    fn parses_and_hashes() {
        let a = ExperimentConfig::from_toml_str(BASE).unwrap();
        a.validate().unwrap();
        assert_eq!(a.m_rule, MRule::LogRatio);
        let reordered = BASE.replace("seed = 1\ntrials = 3", "trials = 3\nseed = 1");
        let b = ExperimentConfig::from_toml_str(&reordered).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig::from_toml_str(&BASE.replace("seed = 1", "seed = 2")).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn invalid_fields_are_located() {
        let bad = ExperimentConfig::from_toml_str(&BASE.replace("r = 2.0", "r = 1.0")).unwrap();
        match bad.validate() {
            Err(Error::Config { path, .. }) => assert_eq!(path, "r"),
            other => panic!("{other:?}"),
        }
        let typo = BASE.replace("s = 1.0", "s = \"one\"");
        match ExperimentConfig::from_toml_str(&typo) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("kernel"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_point_grid_is_rejected() {
        let text = BASE
            .replace("kind = \"recover\"", "kind = \"sweep\"")
            .replace("n = 100", "n_grid = [256]");
        let config = ExperimentConfig::from_toml_str(&text).unwrap();
        assert!(matches!(config.validate(), Err(Error::Config { path, .. }) if path == "n_grid"));
    }
}
