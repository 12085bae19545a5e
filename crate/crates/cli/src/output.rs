//! Artifact directory and run manifest.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}

/// One threshold comparison of an `--assert` run.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, limit, pass: value <= limit }
    }
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub model_hash: Option<String>,
    pub seed: u64,
    pub trials: usize,
    pub threads: Option<usize>,
    pub checks: &'a [Check],
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    /// Effective configuration after flag overrides; feeding it back through `--config`
    /// reproduces the run.
    pub config: &'a RunConfig,
}

/// SHA-256 of the compact JSON of the model sections.
pub fn model_hash(cfg: &RunConfig) -> Option<String> {
    if cfg.model.is_none() && cfg.wigner.is_none() {
        return None;
    }
    let mut h = Sha256::new();
    if let Some(m) = &cfg.model {
        h.update(serde_json::to_vec(m).expect("model serializes"));
    }
    if let Some(w) = &cfg.wigner {
        h.update(serde_json::to_vec(w).expect("wigner spec serializes"));
    }
    Some(format!("{:x}", h.finalize()))
}
