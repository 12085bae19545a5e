use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model_core::{DensityProfile, Thresholds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "index")]
pub enum DomainKind {
    Full,
    /// 1-based edge index.
    Edge(usize),
    /// 1-based component index.
    Bulk(usize),
    Outside,
}

/// A spectral domain: `E`-intervals and an `eta`-range inside the fundamental domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralDomain {
    pub kind: DomainKind,
    pub tau: f64,
    pub tau_prime: f64,
    pub n: usize,
    /// Allowed `E` values; for `Outside` these are the support components to stay away from.
    pub e_ranges: Vec<(f64, f64)>,
    pub eta_min: f64,
    pub eta_max: f64,
}

pub fn make_domain(kind: DomainKind, thresholds: Thresholds, n: usize, profile: Option<&DensityProfile>) -> Result<SpectralDomain> {
    let Thresholds { tau, tau_prime, .. } = thresholds;
    let need = || profile.ok_or_else(|| Error::EmptyDomain("a density profile is required".into()));
    let e_ranges = match kind {
        DomainKind::Full => vec![(-1.0 / tau, 1.0 / tau)],
        DomainKind::Edge(k) => {
            let p = need()?;
            let a = *p
                .edges
                .get(k.wrapping_sub(1))
                .ok_or_else(|| Error::EmptyDomain(format!("no edge {k}")))?;
            vec![(a - tau_prime, a + tau_prime)]
        }
        DomainKind::Bulk(k) => {
            let p = need()?;
            let &(lo, hi) = p
                .components
                .get(k.wrapping_sub(1))
                .ok_or_else(|| Error::EmptyDomain(format!("no component {k}")))?;
            if lo + tau_prime > hi - tau_prime {
                return Err(Error::EmptyDomain(format!("component {k} is narrower than 2 tau'")));
            }
            vec![(lo + tau_prime, hi - tau_prime)]
        }
        DomainKind::Outside => need()?.components.clone(),
    };
    let eta_min = (n as f64).powf(-1.0 + tau);
    let eta_max = 1.0 / tau;
    if eta_min > eta_max {
        return Err(Error::EmptyDomain("eta range is empty".into()));
    }
    Ok(SpectralDomain { kind, tau, tau_prime, n, e_ranges, eta_min, eta_max })
}

impl SpectralDomain {
    fn e_allowed(&self, e: f64) -> bool {
        match self.kind {
            DomainKind::Outside => self
                .e_ranges
                .iter()
                .all(|&(lo, hi)| e <= lo - self.tau_prime || e >= hi + self.tau_prime),
            _ => self.e_ranges.iter().any(|&(lo, hi)| e >= lo && e <= hi),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() >= self.tau
            && z.re.abs() <= 1.0 / self.tau
            && z.im >= self.eta_min
            && z.im <= self.eta_max
            && self.e_allowed(z.re)
    }

    /// `eta_min * N^{delta l}` for `l = 0, 1, ...` up to `eta_max`.
    pub fn eta_ladder(&self, delta: f64) -> Vec<f64> {
        let step = (self.n as f64).powf(delta);
        let mut out = Vec::new();
        let mut eta = self.eta_min;
        while eta <= self.eta_max * (1.0 + 1e-12) {
            out.push(eta);
            eta *= step;
        }
        out
    }

    /// `count` values of `eta` spaced evenly in `log eta` from `eta_min` to `eta_max`.
    pub fn log_etas(&self, count: usize) -> Vec<f64> {
        log_spaced(self.eta_min, self.eta_max, count)
    }

    /// `n_e` evenly spaced energies per `E`-range, crossed with the given `eta` values.
    /// Points outside the domain are dropped.
    pub fn grid(&self, n_e: usize, etas: &[f64]) -> Vec<Complex64> {
        let ranges: Vec<(f64, f64)> = match self.kind {
            DomainKind::Outside => {
                let lo = self.e_ranges.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
                let hi = self.e_ranges.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
                vec![(self.tau, lo - self.tau_prime), (hi + self.tau_prime, 1.0 / self.tau)]
            }
            _ => self.e_ranges.clone(),
        };
        let mut out = Vec::new();
        for (lo, hi) in ranges {
            for i in 0..n_e {
                let e = if n_e == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (n_e - 1) as f64 };
                for &eta in etas {
                    let z = Complex64::new(e, eta);
                    if self.contains(z) {
                        out.push(z);
                    }
                }
            }
        }
        out
    }
}

/// `count` points from `lo` to `hi` (both included), evenly spaced in `log`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| match i {
            0 => lo,
            _ if i + 1 == count => hi,
            _ => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// A grid of about `n_points` values of `z` over every nonempty bulk domain and every edge
/// domain with `a_k >= tau`: energies are shared round-robin between the domains and crossed
/// with `etas`. Points outside the domains are dropped.
pub fn bulk_edge_grid(profile: &DensityProfile, thresholds: Thresholds, n: usize, n_points: usize, etas: &[f64]) -> Result<Vec<Complex64>> {
    let n_eta = etas.len();
    let mut domains = Vec::new();
    for k in 1..=profile.p() {
        if let Ok(d) = make_domain(DomainKind::Bulk(k), thresholds, n, Some(profile)) {
            domains.push(d);
        }
    }
    for k in 1..=profile.edges.len() {
        if profile.edges[k - 1] >= thresholds.tau {
            domains.push(make_domain(DomainKind::Edge(k), thresholds, n, Some(profile))?);
        }
    }
    // Keep |z| >= tau at the smallest eta.
    for d in &mut domains {
        d.e_ranges.iter_mut().for_each(|r| r.0 = r.0.max(thresholds.tau));
    }
    if domains.is_empty() || n_eta == 0 {
        return Err(Error::EmptyDomain("no bulk or edge domain".into()));
    }
    let n_e = n_points.div_ceil(n_eta);
    let mut out = Vec::with_capacity(n_e * n_eta);
    for (j, d) in domains.iter().enumerate() {
        let share = n_e / domains.len() + usize::from(j < n_e % domains.len());
        if share > 0 {
            out.extend(d.grid(share, etas));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_core::PopulationModel;

    #[test]
    fn membership_examples() {
        let n = 1000;
        let profile = DensityProfile::new(&PopulationModel::identity(0.25, None).unwrap()).unwrap();
        let t = Thresholds::default();
        let edge = make_domain(DomainKind::Edge(1), t, n, Some(&profile)).unwrap();
        let eta0 = (n as f64).powf(-1.0 + t.tau);
        assert!(edge.contains(Complex64::new(profile.edges[0], eta0)));
        let full = make_domain(DomainKind::Full, t, n, None).unwrap();
        assert!(!full.contains(Complex64::new(1.0, 0.5 / n as f64)));
        let wide = Thresholds { tau_prime: 2.0, ..t };
        assert!(make_domain(DomainKind::Bulk(1), wide, n, Some(&profile)).is_err());
    }

    #[test]
    fn grid_reaches_both_ends_of_the_ladder() {
        let n = 1000;
        let profile = DensityProfile::new(&PopulationModel::identity(0.5, None).unwrap()).unwrap();
        let t = Thresholds { tau: 0.2, ..Thresholds::default() };
        let d = make_domain(DomainKind::Full, t, n, None).unwrap();
        let zs = bulk_edge_grid(&profile, t, n, 50, &d.log_etas(5)).unwrap();
        assert_eq!(zs.len(), 50);
        let lo = zs.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        let hi = zs.iter().map(|z| z.im).fold(0.0, f64::max);
        assert!((lo - (n as f64).powf(-0.8)).abs() < 1e-15 && hi == 5.0);
    }
}
