use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::factorization::{Projection, ResolventFactorization};
use crate::covariance::PopulationCovariance;
use crate::equivalents::{psi, EquivalentSet};
use crate::error::Result;
use crate::model_core::DensityProfile;
use crate::sampler::{row_rng, Tag};

/// Test vectors in `R^{M+N}`: half uniformly random, the rest structured (coordinate
/// vectors, flat vectors, eigenvectors of `Sigma`, mixed blocks).
#[derive(Debug, Clone)]
pub struct VectorPanel {
    pub vectors: Vec<Vec<f64>>,
}

impl VectorPanel {
    pub fn new(m: usize, n: usize, n_vec: usize, sigma: &PopulationCovariance, seed: u64, trial: u64) -> Self {
        let dim = m + n;
        let n_random = n_vec / 2;
        let mut structured: Vec<Vec<f64>> = Vec::new();
        let unit = |i: usize| {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            v
        };
        structured.push(unit(0));
        structured.push(unit(m));
        let mut flat_n = vec![0.0; dim];
        flat_n[m..].iter_mut().for_each(|x| *x = 1.0 / (n as f64).sqrt());
        structured.push(flat_n);
        let mut flat_m = vec![0.0; dim];
        flat_m[..m].iter_mut().for_each(|x| *x = 1.0 / (m as f64).sqrt());
        structured.push(flat_m);
        for k in [0, m - 1] {
            let mut c = vec![0.0; m];
            c[k] = 1.0;
            let mut v = sigma.from_eigen(&c);
            v.resize(dim, 0.0);
            structured.push(v);
        }
        let mut mixed = vec![0.0; dim];
        mixed[0] = 1.0 / 2f64.sqrt();
        mixed[m] = 1.0 / 2f64.sqrt();
        structured.push(mixed);
        let mut extra = 1;
        while structured.len() < n_vec - n_random {
            structured.push(unit(extra % m));
            structured.push(unit(m + extra % n));
            extra += 1;
        }
        structured.truncate(n_vec - n_random);
        let random = (0..n_random).map(|k| {
            let mut rng = row_rng(seed, trial, Tag::Vectors, k as u64);
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let nv = crate::linalg::norm(&v);
            v.into_iter().map(|x| x / nv).collect()
        });
        Self { vectors: structured.into_iter().chain(random).collect() }
    }
}

impl VectorPanel {
    /// Test vectors in `R^N` for `W + A`: half random, then `e_1`, the flat vector, the
    /// extreme eigenvectors of `A` and further coordinate vectors.
    pub fn wigner(n: usize, n_vec: usize, basis: Option<&faer::Mat<f64>>, seed: u64, trial: u64) -> Self {
        let n_random = n_vec / 2;
        let unit = |i: usize| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        };
        let eigvec = |k: usize| match basis {
            Some(o) => o.col(k).iter().copied().collect(),
            None => unit(k),
        };
        let mut structured = vec![unit(0), vec![1.0 / (n as f64).sqrt(); n], eigvec(0), eigvec(n - 1)];
        let mut extra = 1;
        while structured.len() < n_vec - n_random {
            structured.push(unit(extra % n));
            extra += 1;
        }
        structured.truncate(n_vec - n_random);
        let random = (0..n_random).map(|k| {
            let mut rng = row_rng(seed, trial, Tag::Vectors, k as u64);
            let v: Vec<f64> = (0..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
            let nv = crate::linalg::norm(&v);
            v.into_iter().map(|x| x / nv).collect()
        });
        Self { vectors: structured.into_iter().chain(random).collect() }
    }
}

/// One row of an error scan.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub z_re: f64,
    pub z_im: f64,
    pub psi: f64,
    pub max_aniso: f64,
    pub aniso_ratio: f64,
    pub avg_err: f64,
    pub avg_ratio: f64,
    pub n_vec: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ErrorScan {
    pub records: Vec<ErrorRecord>,
}

impl ErrorScan {
    pub const HEADER: &'static str = "z_re,z_im,psi,max_aniso,aniso_ratio,avg_err,avg_ratio,n_vec,seed";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{:e},{:e},{:e},{:e},{:e},{},{}",
                r.z_re, r.z_im, r.psi, r.max_aniso, r.aniso_ratio, r.avg_err, r.avg_ratio, r.n_vec, r.seed
            );
        }
        s
    }

    pub fn max_aniso_ratio(&self) -> f64 {
        self.records.iter().map(|r| r.aniso_ratio).fold(0.0, f64::max)
    }

    pub fn max_avg_ratio(&self) -> f64 {
        self.records.iter().map(|r| r.avg_ratio).fold(0.0, f64::max)
    }
}

/// Largest `|<v, Sigma_ul^{-1}(G - Pi)Sigma_ul^{-1} w>|` over all pairs of the panel, and the
/// averaged error `|m_N - m|`, at each `z` of `equivalents`.
pub fn anisotropic_scan(
    fact: &ResolventFactorization,
    equivalents: &[EquivalentSet],
    panel: &VectorPanel,
    seed: u64,
) -> ErrorScan {
    let projections: Vec<Projection> = panel.vectors.par_iter().map(|v| fact.project(v)).collect();
    let n_vec = projections.len();
    let records = equivalents
        .par_iter()
        .map(|eq| {
            let z = eq.z;
            let d = fact.kernel(z);
            let shift = eq.conjugated_upper_shift();
            let mut worst: f64 = 0.0;
            for a in 0..n_vec {
                for b in a..n_vec {
                    let e = fact.anisotropic_error(z, &d, &shift, eq.pi_lower_scalar, &projections[a], &projections[b]);
                    worst = worst.max(e.norm());
                }
            }
            let avg_err = (fact.m_n(z) - eq.m).norm();
            ErrorRecord {
                z_re: z.re,
                z_im: z.im,
                psi: eq.psi,
                max_aniso: worst,
                aniso_ratio: worst / eq.psi,
                avg_err,
                avg_ratio: avg_err * fact.n as f64 * z.im,
                n_vec,
                seed,
            }
        })
        .collect();
    ErrorScan { records }
}

/// Averaged-law record; `improved_ratio` is set away from the support.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AveragedRecord {
    pub z: Complex64,
    pub m: Complex64,
    pub m_n: Complex64,
    pub avg_err: f64,
    /// `|m_N - m| N eta`.
    pub avg_ratio: f64,
    pub kappa: f64,
    /// `|m_N - m| / ((kappa + eta)^{-1/2} Psi^2)`.
    pub improved_ratio: Option<f64>,
}

pub fn averaged_scan(fact: &ResolventFactorization, profile: &DensityProfile, grid: &[Complex64]) -> Result<Vec<AveragedRecord>> {
    grid.par_iter()
        .map(|&z| {
            let m = profile.stieltjes(z)?.m;
            let m_n = fact.m_n(z);
            let avg_err = (m_n - m).norm();
            let dist = profile.distance_to_support(z.re);
            let kappa = if dist > 0.0 { dist } else { profile.kappa(z.re) };
            let improved_ratio = (dist > 0.0).then(|| {
                let p = psi(z, m, fact.n);
                avg_err / ((kappa + z.im).powf(-0.5) * p * p)
            });
            Ok(AveragedRecord { z, m, m_n, avg_err, avg_ratio: avg_err * fact.n as f64 * z.im, kappa, improved_ratio })
        })
        .collect()
}
