use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::critical::{locate_critical_points, CriticalSet};
use super::inverse_map::InverseMap;
use super::population::PopulationModel;
use super::quantiles::{bulk_counts, BulkCounts};
use super::solver::{solve_with, SolverSettings, StieltjesValue};
use crate::error::Result;

/// Mass of the asymptotic density at zero, `(1 - sum_i r_i)_+`.
///
/// With no mass of `pi` at zero this is `(1 - phi)_+`.
pub fn atom_mass(model: &PopulationModel) -> f64 {
    (1.0 - InverseMap::new(model).total_r()).max(0.0)
}

/// The solved asymptotic density: edges, support components and counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityProfile {
    pub model: PopulationModel,
    pub critical: CriticalSet,
    /// `a_1 >= ... >= a_2p`.
    pub edges: Vec<f64>,
    /// `[a_2k, a_2k-1]` intersected with `[0, inf)`, as `(lo, hi)`, in decreasing order.
    pub components: Vec<(f64, f64)>,
    pub atom_mass_at_zero: f64,
    /// Present when the model carries dimensions.
    pub counts: Option<BulkCounts>,
    pub solver_settings: SolverSettings,
    #[serde(skip)]
    map: Option<InverseMap>,
}

impl DensityProfile {
    pub fn new(model: &PopulationModel) -> Result<Self> {
        Self::with_settings(model, SolverSettings::default())
    }

    pub fn with_settings(model: &PopulationModel, settings: SolverSettings) -> Result<Self> {
        model.validate()?;
        let critical = locate_critical_points(model)?;
        let edges = critical.edges();
        let components = edges.chunks(2).map(|c| (c[1].max(0.0), c[0])).collect();
        let mut profile = Self {
            model: model.clone(),
            critical,
            edges,
            components,
            atom_mass_at_zero: atom_mass(model),
            counts: None,
            solver_settings: settings,
            map: Some(InverseMap::new(model)),
        };
        if model.dims.is_some() {
            profile.counts = Some(bulk_counts(&profile)?);
        }
        Ok(profile)
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn map(&self) -> InverseMap {
        self.map.clone().unwrap_or_else(|| InverseMap::new(&self.model))
    }

    /// Index of the component containing `e`, if any.
    pub fn component_of(&self, e: f64) -> Option<usize> {
        self.components.iter().position(|&(lo, hi)| e >= lo && e <= hi)
    }

    /// Distance from `e` to the support.
    pub fn distance_to_support(&self, e: f64) -> f64 {
        self.components
            .iter()
            .map(|&(lo, hi)| if e < lo { lo - e } else if e > hi { e - hi } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }

    /// `kappa(E)`, the distance to the nearest edge.
    pub fn kappa(&self, e: f64) -> f64 {
        self.edges.iter().map(|a| (a - e).abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn stieltjes(&self, z: Complex64) -> Result<StieltjesValue> {
        let map = self.map();
        solve_with(&map, z, &self.solver_settings)
    }

    /// `pi^{-1} Im m(E + i0)`; the atom at zero is reported separately.
    pub fn density_at(&self, e: f64) -> Result<f64> {
        if self.component_of(e).is_none() {
            return Ok(0.0);
        }
        let v = self.stieltjes(Complex64::new(e, 0.0))?;
        Ok(v.m.im.max(0.0) / std::f64::consts::PI)
    }

    /// Density on a uniform grid of `n` points over `[lo, hi]`, as `(E, rho)` pairs.
    pub fn density_grid(&self, lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, f64)>> {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let e = if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
                Ok((e, self.density_at(e)?))
            })
            .collect()
    }
}
