use faer::{Mat, MatRef};
use num_complex::Complex64;
use rayon::prelude::*;

use super::scans::{ErrorRecord, ErrorScan};
use crate::equivalents::WignerEquivalents;
use crate::error::Result;
use crate::linalg::{sym_eigen, transpose_apply};

/// `W + A = U diag(mu) U^T`, from which `G^W(z) = (W + A - z)^{-1}` is assembled.
#[derive(Debug, Clone)]
pub struct WignerFactorization {
    pub mu: Vec<f64>,
    pub u: Mat<f64>,
}

impl WignerFactorization {
    pub fn new(h: MatRef<'_, f64>) -> Result<Self> {
        let (mu, u) = sym_eigen(h)?;
        Ok(Self { mu, u })
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        transpose_apply(self.u.as_ref(), v)
    }

    pub fn entry(&self, z: Complex64, pv: &[f64], pw: &[f64]) -> Complex64 {
        self.mu.iter().zip(pv.iter().zip(pw)).map(|(&l, (a, b))| (a * b) / (l - z)).sum()
    }

    pub fn mean_trace(&self, z: Complex64) -> Complex64 {
        self.mu.iter().map(|&l| 1.0 / (l - z)).sum::<Complex64>() / self.n() as f64
    }
}

/// `|<v, (G^W - Pi^W) w>| / Psi^W` over all pairs of `vectors`, and `|N^{-1} tr G^W - m^W| N eta`.
pub fn wigner_scan(
    fact: &WignerFactorization,
    equivalents: &[WignerEquivalents],
    vectors: &[Vec<f64>],
    seed: u64,
) -> ErrorScan {
    let pg: Vec<Vec<f64>> = vectors.par_iter().map(|v| fact.project(v)).collect();
    let records = equivalents
        .par_iter()
        .map(|eq| {
            let pa: Vec<Vec<f64>> = vectors.iter().map(|v| eq.to_eigen(v)).collect();
            let z = eq.z;
            let mut worst: f64 = 0.0;
            for a in 0..vectors.len() {
                for b in a..vectors.len() {
                    let e = fact.entry(z, &pg[a], &pg[b]) - eq.entry_eig(&pa[a], &pa[b]);
                    worst = worst.max(e.norm());
                }
            }
            let avg_err = (fact.mean_trace(z) - eq.m).norm();
            ErrorRecord {
                z_re: z.re,
                z_im: z.im,
                psi: eq.psi,
                max_aniso: worst,
                aniso_ratio: worst / eq.psi,
                avg_err,
                avg_ratio: avg_err * fact.n() as f64 * z.im,
                n_vec: vectors.len(),
                seed,
            }
        })
        .collect();
    ErrorScan { records }
}
