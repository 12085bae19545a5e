//! Run configuration. Every section is optional except `schema_version`; missing sections take
//! their defaults, unknown keys are rejected.

use std::path::Path;

use anyhow::{bail, Context, Result};
use covlaws::model_core::{PopulationModel, Thresholds};
use covlaws::sampler::EntryDistribution;
use covlaws::statistics::EdgeSide;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PopulationModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wigner: Option<WignerSpec>,
    #[serde(default = "default_distribution")]
    pub distribution: EntryDistribution,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub regularity: Thresholds,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub panel: PanelSpec,
    #[serde(default)]
    pub rigidity: RigiditySpec,
    #[serde(default)]
    pub edge: EdgeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kcoeffs: Option<KSpec>,
    #[serde(default)]
    pub thresholds: AssertThresholds,
}

fn default_distribution() -> EntryDistribution {
    EntryDistribution::gaussian()
}

fn default_seed() -> u64 {
    1
}

fn default_trials() -> usize {
    10
}

/// Deformation `A` of a Wigner matrix: a spectrum of weighted atoms, optionally rotated by a
/// Haar orthogonal matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSpec {
    pub n: usize,
    pub spectrum: Vec<SpectrumAtom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation_seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumAtom {
    pub value: f64,
    pub weight: f64,
}

impl WignerSpec {
    /// Eigenvalues of `A`, in decreasing order. Atom multiplicities are rounded cumulatively.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        if self.n == 0 || self.spectrum.is_empty() {
            bail!("wigner: n and spectrum must be nonempty");
        }
        let total: f64 = self.spectrum.iter().map(|a| a.weight).sum();
        if self.spectrum.iter().any(|a| !(a.weight > 0.0) || !a.value.is_finite()) || (total - 1.0).abs() > 1e-9 {
            bail!("wigner.spectrum: weights must be positive and sum to 1 (got {total})");
        }
        let mut atoms = self.spectrum.clone();
        atoms.sort_by(|a, b| b.value.total_cmp(&a.value));
        let mut out = Vec::with_capacity(self.n);
        let mut cum = 0.0;
        for atom in &atoms {
            cum += atom.weight;
            let upto = ((cum * self.n as f64).round() as usize).min(self.n);
            out.resize(upto.max(out.len()), atom.value);
        }
        out.resize(self.n, atoms.last().unwrap().value);
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    /// Points of the spectral-parameter grid.
    pub n_points: usize,
    pub n_eta: usize,
    /// Smallest `eta` is `N^{eta_exponent}`; the largest is `1/tau`.
    pub eta_exponent: f64,
    /// Energies of the density grid.
    pub density_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_points: 50, n_eta: 5, eta_exponent: -0.8, density_points: 1000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PanelSpec {
    pub n_vectors: usize,
}

impl Default for PanelSpec {
    fn default() -> Self {
        Self { n_vectors: 20 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RigiditySpec {
    pub epsilon: f64,
    pub percentile: f64,
}

impl Default for RigiditySpec {
    fn default() -> Self {
        Self { epsilon: 0.2, percentile: 0.99 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EdgeSpec {
    /// 1-based edge index for covariance models.
    pub edge: usize,
    /// Side of the Wigner support.
    pub side: EdgeSide,
    pub depth: usize,
    /// Seed of the Gaussian reference; `seed + 1` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_seed: Option<u64>,
}

impl Default for EdgeSpec {
    fn default() -> Self {
        Self { edge: 1, side: EdgeSide::Right, depth: 1, reference_seed: None }
    }
}

/// Either explicit moment lists or two entry laws whose moments are used.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law0: Option<EntryDistribution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law1: Option<EntryDistribution>,
    pub theta: f64,
    pub n_max: usize,
}

/// Bands checked in `--assert` mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AssertThresholds {
    pub aniso_ratio_max: f64,
    pub avg_ratio_max: f64,
    pub rigidity_ratio_max: f64,
    pub gap_outliers_max: usize,
    pub ks_max: f64,
}

impl Default for AssertThresholds {
    fn default() -> Self {
        Self { aniso_ratio_max: 10.0, avg_ratio_max: 20.0, rigidity_ratio_max: 15.0, gap_outliers_max: 0, ks_max: 0.15 }
    }
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let inner = e.inner();
            anyhow::anyhow!("{origin}: at `{}` (line {}, column {}): {inner}", e.path(), inner.line(), inner.column())
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            bail!("{origin}: schema_version {} is not supported (expected {SCHEMA_VERSION})", cfg.schema_version);
        }
        if let Some(model) = &cfg.model {
            model.validate().with_context(|| format!("{origin}: at `model`"))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn model(&self) -> Result<&PopulationModel> {
        self.model.as_ref().context("config has no `model` section")
    }

    pub fn wigner(&self) -> Result<&WignerSpec> {
        self.wigner.as_ref().context("config has no `wigner` section")
    }

    /// Model with dimensions, as needed by every sampling command.
    pub fn sized_model(&self) -> Result<&PopulationModel> {
        let model = self.model()?;
        if model.dims.is_none() {
            bail!("at `model.dims`: this command samples matrices and needs dimensions");
        }
        Ok(model)
    }
}
