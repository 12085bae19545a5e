use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityProfile;
use super::inverse_map::InverseMap;
use super::population::PopulationModel;
use super::solver::{solve_m, SolverSettings};
use crate::error::{Error, Result};

/// Regularity thresholds. `bulk_floor` is the lower bound `c` on the bulk density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub tau: f64,
    pub tau_prime: f64,
    pub bulk_floor: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { tau: 0.05, tau_prime: 0.1, bulk_floor: 0.01 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeReport {
    /// 1-based edge index.
    pub k: usize,
    pub a: f64,
    pub x: f64,
    pub min_gap: f64,
    pub min_pole_distance: f64,
    pub regular: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BulkReport {
    /// 1-based component index.
    pub k: usize,
    pub lo: f64,
    pub hi: f64,
    /// `None` when `[a_2k + tau', a_2k-1 - tau']` is empty.
    pub min_density: Option<f64>,
    pub regular: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityProbe {
    pub z: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityReport {
    pub thresholds: Thresholds,
    pub edges: Vec<EdgeReport>,
    pub bulks: Vec<BulkReport>,
    pub stability: Vec<StabilityProbe>,
}

impl RegularityReport {
    pub fn all_regular(&self) -> bool {
        self.edges.iter().all(|e| e.regular) && self.bulks.iter().all(|b| b.regular)
    }
}

const BULK_GRID: usize = 101;

pub fn check_regularity(profile: &DensityProfile, thresholds: Thresholds) -> Result<RegularityReport> {
    let Thresholds { tau, tau_prime, bulk_floor } = thresholds;
    let poles: Vec<f64> = profile.model.atoms.iter().map(|a| -1.0 / a.s).collect();
    let edges = profile
        .critical
        .points
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let min_gap = profile
                .edges
                .iter()
                .enumerate()
                .filter(|&(l, _)| l != k)
                .map(|(_, &b)| (c.a - b).abs())
                .fold(f64::INFINITY, f64::min);
            let min_pole_distance = poles.iter().map(|p| (c.x - p).abs()).fold(f64::INFINITY, f64::min);
            let regular = c.a >= tau && min_gap >= tau && min_pole_distance >= tau;
            EdgeReport { k: k + 1, a: c.a, x: c.x, min_gap, min_pole_distance, regular }
        })
        .collect();

    let mut bulks = Vec::new();
    let mut stability = Vec::new();
    let settings = profile.solver_settings;
    for (k, &(lo, hi)) in profile.components.iter().enumerate() {
        let (a, b) = (lo + tau_prime, hi - tau_prime);
        let min_density = if a <= b {
            let grid = profile.density_grid(a, b, BULK_GRID)?;
            Some(grid.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min))
        } else {
            None
        };
        let regular = min_density.is_some_and(|d| d >= bulk_floor);
        bulks.push(BulkReport { k: k + 1, lo, hi, min_density, regular });
        let z = Complex64::new(0.5 * (lo + hi), 0.0);
        let (alpha, beta) = stability_coefficients(z, None, &profile.model, &settings)?;
        stability.push(StabilityProbe { z, alpha, beta });
    }
    for &e in &profile.edges {
        if e > 0.0 {
            let z = Complex64::new(e, 0.0);
            let (alpha, beta) = stability_coefficients(z, None, &profile.model, &settings)?;
            stability.push(StabilityProbe { z, alpha, beta });
        }
    }
    Ok(RegularityReport { thresholds, edges, bulks, stability })
}

/// `varpi_k = (|f''(x_k)| / 2)^(1/3)` for the 1-based edge index `k`.
pub fn edge_curvature(profile: &DensityProfile, k: usize) -> Result<f64> {
    let c = profile
        .critical
        .points
        .get(k.wrapping_sub(1))
        .ok_or_else(|| Error::DegenerateEdge { edge: k, reason: "no such edge".into() })?;
    if c.x.is_infinite() {
        return Err(Error::DegenerateEdge { edge: k, reason: "hard edge at zero".into() });
    }
    if c.degenerate {
        return Err(Error::DegenerateEdge { edge: k, reason: "double critical point".into() });
    }
    let f2 = profile.map().eval(c.x)?.f2;
    if f2.abs() < 1e-8 {
        return Err(Error::DegenerateEdge { edge: k, reason: format!("f''(x_k) = {f2:e}") });
    }
    Ok((f2.abs() / 2.0).cbrt())
}

/// `(alpha, beta)` with `alpha (u - m)^2 + beta (u - m) = u m (f(u) - z)`.
///
/// `beta = m^2 f'(m)`. `u` defaults to `m`.
pub fn stability_coefficients(
    z: Complex64,
    u: Option<Complex64>,
    model: &PopulationModel,
    settings: &SolverSettings,
) -> Result<(Complex64, Complex64)> {
    let m = solve_m(z, model, settings)?.m;
    let map = InverseMap::new(model);
    Ok(stability_at(&map, m, u.unwrap_or(m)))
}

/// The coefficients for a given `m` (not necessarily solving the equation).
pub fn stability_at(map: &InverseMap, m: Complex64, u: Complex64) -> (Complex64, Complex64) {
    let mut alpha = Complex64::new(0.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for (&r, &s) in map.r.iter().zip(&map.s) {
        let d = 1.0 + m * s;
        let t = r * s * s / (d * d);
        sum += t;
        alpha += t / (1.0 + u * s);
    }
    (-m * alpha, 1.0 - m * m * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(phi: f64) -> DensityProfile {
        DensityProfile::new(&PopulationModel::identity(phi, None).unwrap()).unwrap()
    }

    #[test]
    fn curvature_closed_forms() {
        let p = mp(0.25);
        assert!((edge_curvature(&p, 2).unwrap() - 0.5).abs() < 1e-12);
        assert!((edge_curvature(&p, 1).unwrap() - 10.125f64.cbrt()).abs() < 1e-12);
        assert!((edge_curvature(&p, 1).unwrap() - 2.1633).abs() < 1e-4);
        assert!((edge_curvature(&mp(1.0), 1).unwrap() - 2f64.powf(4.0 / 3.0)).abs() < 1e-10);
        assert!(edge_curvature(&mp(1.0), 2).is_err());
    }

    #[test]
    fn quarter_model_is_regular() {
        let thresholds = Thresholds { tau: 0.1, ..Thresholds::default() };
        let report = check_regularity(&mp(0.25), thresholds).unwrap();
        assert!(report.all_regular());
        assert!((report.edges[0].min_gap - 2.0).abs() < 1e-12);
        assert!((report.edges[0].min_pole_distance - 1.0 / 3.0).abs() < 1e-12);
        assert!((report.edges[1].min_pole_distance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_vanishes_at_edges_and_not_in_bulk() {
        let model = PopulationModel::identity(0.25, None).unwrap();
        let s = SolverSettings::default();
        let (_, beta) = stability_coefficients(Complex64::new(2.25, 0.0), None, &model, &s).unwrap();
        assert!(beta.norm() < 1e-4, "{beta}");
        let (_, beta) = stability_coefficients(Complex64::new(1.0, 0.0), None, &model, &s).unwrap();
        assert!(beta.norm() >= 0.1);
        let (_, beta) = stability_coefficients(Complex64::new(5.0, 0.0), None, &model, &s).unwrap();
        assert!(beta.im.abs() < 1e-12 && beta.re > 0.3);
    }
}
