//! Integrals of the density: component masses, classical locations and counts.
//!
//! Each component `[lo, hi]` is parametrized by `E = hi - (hi - lo)(1 - cos t)/2`, `t` in
//! `[0, pi]`. The substitution removes square-root edges and the inverse square-root hard
//! edge at zero, leaving a smooth integrand for composite Gauss-Legendre panels.

use serde::{Deserialize, Serialize};

use super::density::DensityProfile;
use crate::error::{Error, Result};
use crate::quadrature::{barycentric_eval, barycentric_weights, gauss_legendre};

const PANELS: usize = 24;
const NODES: usize = 12;

#[derive(Debug, Clone)]
struct Panel {
    t0: f64,
    t1: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    bw: Vec<f64>,
    /// Mass of the component to the right of `t0`.
    before: f64,
    mass: f64,
}

/// Cumulative mass of one component measured from its upper edge.
#[derive(Debug, Clone)]
pub struct ComponentQuadrature {
    pub lo: f64,
    pub hi: f64,
    panels: Vec<Panel>,
    pub mass: f64,
}

impl ComponentQuadrature {
    pub fn new(profile: &DensityProfile, lo: f64, hi: f64) -> Result<Self> {
        let (gx, gw) = gauss_legendre(NODES);
        let half = 0.5 * (hi - lo);
        let mut panels = Vec::with_capacity(PANELS);
        let mut before = 0.0;
        for j in 0..PANELS {
            let t0 = std::f64::consts::PI * j as f64 / PANELS as f64;
            let t1 = std::f64::consts::PI * (j + 1) as f64 / PANELS as f64;
            let c = 0.5 * (t0 + t1);
            let h = 0.5 * (t1 - t0);
            let nodes: Vec<f64> = gx.iter().map(|x| c + h * x).collect();
            let values = nodes
                .iter()
                .map(|&t| {
                    let e = hi - half * (1.0 - t.cos());
                    Ok(profile.density_at(e)? * half * t.sin())
                })
                .collect::<Result<Vec<f64>>>()?;
            let mass: f64 = values.iter().zip(&gw).map(|(v, w)| v * w * h).sum();
            let bw = barycentric_weights(&nodes);
            panels.push(Panel { t0, t1, nodes, values, bw, before, mass });
            before += mass;
        }
        Ok(Self { lo, hi, panels, mass: before })
    }

    fn e_of(&self, t: f64) -> f64 {
        self.hi - 0.5 * (self.hi - self.lo) * (1.0 - t.cos())
    }

    // Integral of the panel interpolant from t0 to t.
    fn partial(&self, p: &Panel, t: f64) -> f64 {
        let (gx, gw) = gauss_legendre(NODES);
        let c = 0.5 * (p.t0 + t);
        let h = 0.5 * (t - p.t0);
        gx.iter()
            .zip(&gw)
            .map(|(x, w)| w * h * barycentric_eval(&p.nodes, &p.bw, &p.values, c + h * x))
            .sum()
    }

    /// `E` such that the mass of `[E, hi]` equals `target`.
    pub fn quantile(&self, target: f64) -> Result<f64> {
        if !(0.0..=self.mass * (1.0 + 1e-12)).contains(&target) {
            return Err(Error::Quadrature { achieved: (target - self.mass).abs() });
        }
        let j = self
            .panels
            .iter()
            .position(|p| p.before + p.mass >= target)
            .unwrap_or(self.panels.len() - 1);
        let p = &self.panels[j];
        let want = target - p.before;
        let (mut a, mut b) = (p.t0, p.t1);
        for _ in 0..100 {
            let mid = 0.5 * (a + b);
            if self.partial(p, mid) < want {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-15 {
                break;
            }
        }
        Ok(self.e_of(0.5 * (a + b)))
    }
}

/// Classical eigenvalue locations, per component and in global order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalLocations {
    /// `gamma_{k,i}`, decreasing within each component.
    pub per_component: Vec<Vec<f64>>,
}

impl ClassicalLocations {
    pub fn flat(&self) -> Vec<f64> {
        self.per_component.iter().flatten().copied().collect()
    }
}

/// Both evaluations of the number of eigenvalues per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BulkCounts {
    /// From the population atoms between consecutive critical points.
    pub counting: Vec<usize>,
    /// `N` times the mass of each component.
    pub integral: Vec<f64>,
}

/// Masses of all components.
pub fn component_masses(profile: &DensityProfile) -> Result<Vec<ComponentQuadrature>> {
    profile
        .components
        .iter()
        .map(|&(lo, hi)| ComponentQuadrature::new(profile, lo, hi))
        .collect()
}

/// Number of eigenvalues per component, by counting atoms and by integrating the density.
pub fn bulk_counts(profile: &DensityProfile) -> Result<BulkCounts> {
    let dims = profile.model.dims()?;
    let n = dims.n as f64;
    let m = dims.m as f64;
    let p = profile.p();
    let xs = profile.critical.xs();
    let total_r: f64 = profile.map().total_r();
    let mut counting = Vec::with_capacity(p);
    for k in 0..p {
        let (upper, lower) = (xs[2 * k], xs[2 * k + 1]);
        let c = if k + 1 == p && total_r >= 1.0 - 1e-12 {
            dims.n - counting.iter().sum::<usize>()
        } else {
            let w: f64 = profile
                .model
                .atoms
                .iter()
                .filter(|a| {
                    let pole = -1.0 / a.s;
                    lower <= pole && pole <= upper
                })
                .map(|a| a.weight)
                .sum();
            (m * w).round() as usize
        };
        counting.push(c);
    }
    let masses = component_masses(profile)?;
    let integral: Vec<f64> = masses.iter().map(|q| n * q.mass).collect();
    for (k, (&c, &i)) in counting.iter().zip(&integral).enumerate() {
        if (c as f64 - i).abs() > 0.5 {
            return Err(Error::CountMismatch { component: k + 1, counted: c as f64, integral: i });
        }
    }
    Ok(BulkCounts { counting, integral })
}

/// `gamma_{k,i}` solving `N int_{gamma_{k,i}}^{a_{2k-1}} rho = i - 1/2` for `i = 1..N_k`.
pub fn classical_locations(profile: &DensityProfile, n: usize) -> Result<ClassicalLocations> {
    let masses = component_masses(profile)?;
    let counts: Vec<usize> = match &profile.counts {
        Some(c) => c.counting.clone(),
        None => masses.iter().map(|q| (n as f64 * q.mass).round() as usize).collect(),
    };
    let nf = n as f64;
    let per_component = masses
        .iter()
        .zip(&counts)
        .map(|(q, &nk)| {
            (1..=nk)
                .map(|i| q.quantile(((i as f64 - 0.5) / nf).min(q.mass)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassicalLocations { per_component })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_core::density::atom_mass;
    use crate::model_core::population::{Atom, Dims, PopulationModel};

    #[test]
    fn mass_is_conserved() {
        for &phi in &[0.25, 1.0, 3.0] {
            let model = PopulationModel::identity(phi, None).unwrap();
            let profile = DensityProfile::new(&model).unwrap();
            let total: f64 = component_masses(&profile).unwrap().iter().map(|q| q.mass).sum();
            assert!((total + atom_mass(&model) - 1.0).abs() < 1e-6, "phi={phi}: {total}");
        }
    }

    #[test]
    fn three_component_counts() {
        let atoms = vec![
            Atom { s: 10.0, weight: 0.1 },
            Atom { s: 5.0, weight: 0.1 },
            Atom { s: 1.5, weight: 0.5 },
            Atom { s: 1.0, weight: 0.3 },
        ];
        let dims = Dims { m: 100, m_hat: 100, n: 1000 };
        let model = PopulationModel::new(0.1, atoms, Some(dims)).unwrap();
        let profile = DensityProfile::new(&model).unwrap();
        let counts = profile.counts.clone().unwrap();
        assert_eq!(counts.counting, vec![10, 10, 80]);
        assert_eq!(counts.counting.iter().sum::<usize>(), 100);
    }

    #[test]
    fn first_location_has_half_an_eigenvalue_above() {
        let model = PopulationModel::identity(0.5, Some(400)).unwrap();
        let profile = DensityProfile::new(&model).unwrap();
        let gamma = classical_locations(&profile, 400).unwrap();
        let g1 = gamma.per_component[0][0];
        // independent check by midpoint rule on [g1, a_1]
        let a1 = profile.edges[0];
        let k = 20_000;
        let h = (a1 - g1) / k as f64;
        let mass: f64 = (0..k).map(|i| profile.density_at(g1 + (i as f64 + 0.5) * h).unwrap() * h).sum();
        assert!((400.0 * mass - 0.5).abs() < 1e-3, "{}", 400.0 * mass);
        assert_eq!(gamma.flat().len(), 200);
    }
}
