use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::covariance::PopulationCovariance;
use crate::error::Result;
use crate::linalg::sym_eigenvalues;
use crate::model_core::DensityProfile;
use crate::sampler::{sample_x, EntryDistribution};

/// Nontrivial eigenvalues of `Q = Sigma^{1/2} X X^T Sigma^{1/2}`, decreasing, `M ∧ N` of them.
pub fn covariance_eigenvalues(sigma: &PopulationCovariance, x: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let y = sigma.sqrt_times(x)?;
    let gram: Mat<f64> = if y.nrows() <= y.ncols() { &y * y.transpose() } else { y.transpose() * &y };
    let mut ev = sym_eigenvalues(gram.as_ref())?;
    ev.reverse();
    Ok(ev)
}

/// Draws `X` for trial `trial` and returns the eigenvalues of the sample covariance matrix.
pub fn draw_covariance_eigenvalues(
    sigma: &PopulationCovariance,
    n: usize,
    dist: &EntryDistribution,
    seed: u64,
    trial: u64,
) -> Result<Vec<f64>> {
    let x = sample_x(dist, sigma.dim(), n, seed, trial)?;
    covariance_eigenvalues(sigma, x.matrix.as_ref())
}

/// Eigenvalues split into the blocks `lambda_{k,1} >= ... >= lambda_{k,N_k}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledEigenvalues {
    pub blocks: Vec<Vec<f64>>,
    /// Whether every gap midpoint has exactly `N_1 + ... + N_k` eigenvalues above it.
    pub separated: bool,
    pub warnings: Vec<String>,
}

/// Splits decreasing eigenvalues into consecutive blocks of sizes `N_1, ..., N_p`.
pub fn component_eigenvalues(eigenvalues: &[f64], profile: &DensityProfile) -> LabeledEigenvalues {
    let counts: Vec<usize> = match &profile.counts {
        Some(c) => c.counting.clone(),
        None => vec![eigenvalues.len()],
    };
    let mut warnings = Vec::new();
    let total: usize = counts.iter().sum();
    if total != eigenvalues.len() {
        warnings.push(format!("{} eigenvalues for {} labels", eigenvalues.len(), total));
    }
    let mut blocks = Vec::with_capacity(counts.len());
    let mut start = 0;
    for &nk in &counts {
        let end = (start + nk).min(eigenvalues.len());
        blocks.push(eigenvalues[start..end].to_vec());
        start = end;
    }
    let mut separated = true;
    let mut above = 0;
    for k in 0..profile.p().saturating_sub(1) {
        above += counts[k];
        let mid = 0.5 * (profile.components[k].0 + profile.components[k + 1].1);
        let n_above = eigenvalues.iter().filter(|&&l| l > mid).count();
        if n_above != above {
            separated = false;
            warnings.push(format!("{n_above} eigenvalues above gap {} at {mid:.6}, expected {above}", k + 1));
        }
    }
    LabeledEigenvalues { blocks, separated, warnings }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_core::PopulationModel;

    #[test]
    fn single_block_and_psd() {
        let model = PopulationModel::identity(0.5, Some(80)).unwrap();
        let profile = DensityProfile::new(&model).unwrap();
        let sigma = PopulationCovariance::from_model(&model).unwrap();
        let ev = draw_covariance_eigenvalues(&sigma, 80, &EntryDistribution::gaussian(), 1, 0).unwrap();
        assert_eq!(ev.len(), 40);
        assert!(ev.iter().all(|&l| l >= -1e-12));
        assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        let lab = component_eigenvalues(&ev, &profile);
        assert_eq!(lab.blocks.len(), 1);
        assert_eq!(lab.blocks[0].len(), 40);
        assert!(lab.separated);
    }

    #[test]
    fn wide_sample_uses_companion() {
        let model = PopulationModel::identity(2.0, Some(30)).unwrap();
        let sigma = PopulationCovariance::from_model(&model).unwrap();
        let ev = draw_covariance_eigenvalues(&sigma, 30, &EntryDistribution::gaussian(), 3, 0).unwrap();
        assert_eq!(ev.len(), 30);
    }
}
