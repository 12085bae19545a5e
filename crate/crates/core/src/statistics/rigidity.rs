use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::labeling::LabeledEigenvalues;
use crate::model_core::{ClassicalLocations, DensityProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidityEntry {
    /// Component, 1-based.
    pub k: usize,
    /// Index within the component, 1-based.
    pub i: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub error: f64,
    /// `(i ∧ (N_k + 1 - i))^{-1/3} N^{-2/3}`.
    pub scale: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RigidityProfile {
    pub entries: Vec<RigidityEntry>,
}

impl RigidityProfile {
    pub const HEADER: &'static str = "k,i,lambda,gamma,error,scale,ratio";

    pub fn max_ratio(&self) -> f64 {
        self.entries.iter().map(|e| e.ratio).fold(0.0, f64::max)
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.ratio).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for e in &self.entries {
            let _ = writeln!(s, "{},{},{},{},{:e},{:e},{}", e.k, e.i, e.lambda, e.gamma, e.error, e.scale, e.ratio);
        }
        s
    }
}

/// Empirical `q`-quantile (nearest rank) of `values`.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Compares `lambda_{k,i}` with `gamma_{k,i}` for all `gamma_{k,i} >= tau`.
pub fn rigidity_profile(labeled: &LabeledEigenvalues, gamma: &ClassicalLocations, n: usize, tau: f64) -> RigidityProfile {
    let n23 = (n as f64).powf(-2.0 / 3.0);
    let mut entries = Vec::new();
    for (k, (lam, gam)) in labeled.blocks.iter().zip(&gamma.per_component).enumerate() {
        let nk = lam.len().min(gam.len());
        for i in 1..=nk {
            let (l, g) = (lam[i - 1], gam[i - 1]);
            if g < tau {
                continue;
            }
            let depth = i.min(nk + 1 - i) as f64;
            let scale = depth.powf(-1.0 / 3.0) * n23;
            let error = (l - g).abs();
            entries.push(RigidityEntry { k: k + 1, i, lambda: l, gamma: g, error, scale, ratio: error / scale });
        }
    }
    RigidityProfile { entries }
}

/// Eigenvalues `E >= tau` farther than `N^{-2/3 + epsilon}` from the support.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapReport {
    pub epsilon: f64,
    pub distance: f64,
    pub violations: Vec<f64>,
}

impl GapReport {
    pub fn count(&self) -> usize {
        self.violations.len()
    }
}

pub fn support_gap_check(eigenvalues: &[f64], profile: &DensityProfile, n: usize, epsilon: f64, tau: f64) -> GapReport {
    let distance = (n as f64).powf(-2.0 / 3.0 + epsilon);
    let violations = eigenvalues
        .iter()
        .copied()
        .filter(|&e| e >= tau && profile.distance_to_support(e) >= distance)
        .collect();
    GapReport { epsilon, distance, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::PopulationCovariance;
    use crate::model_core::{classical_locations, PopulationModel};
    use crate::sampler::EntryDistribution;
    use crate::statistics::{component_eigenvalues, draw_covariance_eigenvalues};

    #[test]
    fn percentile_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.99), 99.0);
        assert_eq!(percentile(&v, 1.0), 100.0);
        assert_eq!(percentile(&[3.0], 0.5), 3.0);
    }

    #[test]
    fn one_by_one_is_finite() {
        let model = PopulationModel::identity(1.0, Some(1)).unwrap();
        let profile = DensityProfile::new(&model).unwrap();
        let sigma = PopulationCovariance::from_model(&model).unwrap();
        let ev = draw_covariance_eigenvalues(&sigma, 1, &EntryDistribution::gaussian(), 5, 0).unwrap();
        let gamma = classical_locations(&profile, 1).unwrap();
        let lab = component_eigenvalues(&ev, &profile);
        let prof = rigidity_profile(&lab, &gamma, 1, 0.0);
        assert_eq!(prof.entries.len(), 1);
        assert!(prof.entries[0].ratio.is_finite());
    }

    #[test]
    fn moderate_sample_is_rigid() {
        let n = 300;
        let model = PopulationModel::identity(1.0, Some(n)).unwrap();
        let profile = DensityProfile::new(&model).unwrap();
        let sigma = PopulationCovariance::from_model(&model).unwrap();
        let ev = draw_covariance_eigenvalues(&sigma, n, &EntryDistribution::gaussian(), 11, 0).unwrap();
        let gamma = classical_locations(&profile, n).unwrap();
        let prof = rigidity_profile(&component_eigenvalues(&ev, &profile), &gamma, n, 0.05);
        assert!(percentile(&prof.ratios(), 0.99) < 15.0, "{}", prof.max_ratio());
        assert_eq!(support_gap_check(&ev, &profile, n, 0.2, 0.05).count(), 0);
    }
}
