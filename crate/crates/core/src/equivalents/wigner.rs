use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::covariance::psi;
use crate::error::{Error, Result};
use crate::linalg::transpose_apply;
use crate::model_core::solver::{solve_with, SelfConsistent, SolverSettings, StieltjesValue};

/// `m = (1/N) sum_i 1 / (a_i - m - z)` for the spectrum `a` of `A`.
#[derive(Debug, Clone)]
pub struct WignerEquation {
    pub a: Vec<f64>,
}

impl WignerEquation {
    fn sums(&self, m: Complex64, z: Complex64) -> (Complex64, Complex64) {
        let (mut s1, mut s2) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &a in &self.a {
            let g = 1.0 / (a - m - z);
            s1 += g;
            s2 += g * g;
        }
        let n = self.a.len() as f64;
        (s1 / n, s2 / n)
    }
}

impl SelfConsistent for WignerEquation {
    fn residual(&self, m: Complex64, z: Complex64) -> Complex64 {
        m - self.sums(m, z).0
    }
    fn d_m(&self, m: Complex64, z: Complex64) -> Complex64 {
        1.0 - self.sums(m, z).1
    }
    fn d_z(&self, m: Complex64, z: Complex64) -> Complex64 {
        -self.sums(m, z).1
    }
    fn fixed_point(&self, m: Complex64, z: Complex64) -> Complex64 {
        self.sums(m, z).0
    }
    fn scale(&self, _z: Complex64) -> f64 {
        1.0
    }
}

/// `m^W(z)` and the guard `min_i |-m + a_i - z|`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WignerValue {
    pub value: StieltjesValue,
    pub guard_min: f64,
    pub guard_ok: bool,
}

pub fn wigner_m(z: Complex64, a: &[f64], tau: f64, settings: &SolverSettings) -> Result<WignerValue> {
    let eq = WignerEquation { a: a.to_vec() };
    let value = solve_with(&eq, z, settings)?;
    let guard_min = a
        .iter()
        .map(|&ai| (-value.m + ai - z).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(WignerValue { value, guard_min, guard_ok: guard_min >= tau })
}

/// `Pi^W = (-m + A - z)^{-1}`, stored as eigenvalues in the eigenbasis of `A`.
#[derive(Debug, Clone)]
pub struct WignerEquivalents {
    pub z: Complex64,
    pub m: Complex64,
    pub diag: Vec<Complex64>,
    pub psi: f64,
    /// Eigenvectors of `A` as columns; `None` when `A` is diagonal.
    pub basis: Option<Arc<Mat<f64>>>,
}

pub fn wigner_equivalents(
    z: Complex64,
    a: &[f64],
    basis: Option<Arc<Mat<f64>>>,
    settings: &SolverSettings,
) -> Result<WignerEquivalents> {
    let m = wigner_m(z, a, 0.0, settings)?.value.m;
    wigner_from_m(z, m, a, basis)
}

/// Equivalents for a given `m`, which need not solve the equation.
pub fn wigner_from_m(z: Complex64, m: Complex64, a: &[f64], basis: Option<Arc<Mat<f64>>>) -> Result<WignerEquivalents> {
    let diag = a
        .iter()
        .map(|&ai| {
            let d = -m + ai - z;
            if d.norm() < 1e-12 {
                Err(Error::SingularEquivalent { index: 0, value: ai })
            } else {
                Ok(1.0 / d)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let psi = if z.im > 0.0 { psi(z, m, a.len()) } else { f64::INFINITY };
    Ok(WignerEquivalents { z, m, diag, psi, basis })
}

impl WignerEquivalents {
    pub fn to_eigen(&self, v: &[f64]) -> Vec<f64> {
        match &self.basis {
            Some(o) => transpose_apply(o.as_ref().as_ref(), v),
            None => v.to_vec(),
        }
    }

    /// `<v, Pi^W w>` with both vectors in the eigenbasis of `A`.
    pub fn entry_eig(&self, v: &[f64], w: &[f64]) -> Complex64 {
        self.diag.iter().zip(v.iter().zip(w)).map(|(d, (a, b))| d * (a * b)).sum()
    }

    /// `(1/N) tr Pi^W`.
    pub fn mean_trace(&self) -> Complex64 {
        self.diag.iter().sum::<Complex64>() / self.diag.len() as f64
    }
}

/// Edges `(L_-, L_+)` of a single-interval Wigner support.
///
/// With `zeta = z + m` the edges solve `(1/N) sum_i (a_i - zeta)^{-2} = 1` outside the spectrum
/// of `A`, and `L = zeta - (1/N) sum_i 1/(a_i - zeta)`.
pub fn wigner_edges(a: &[f64]) -> (f64, f64) {
    let [lower, upper] = wigner_edge_points(a);
    (lower.l, upper.l)
}

/// A spectral edge of the deformed semicircle law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerEdge {
    /// Solution of `N^{-1} sum (a_i - zeta)^{-2} = 1`.
    pub zeta: f64,
    pub l: f64,
    /// Curvature: the density behaves as `pi^{-1} varpi^{-3/2} sqrt(|E - L|)` near the edge.
    pub varpi: f64,
}

/// Lower and upper edges of the deformed semicircle law.
pub fn wigner_edge_points(a: &[f64]) -> [WignerEdge; 2] {
    let n = a.len() as f64;
    let s2 = |zeta: f64| a.iter().map(|&ai| (ai - zeta).powi(-2)).sum::<f64>() / n;
    let s1 = |zeta: f64| a.iter().map(|&ai| 1.0 / (ai - zeta)).sum::<f64>() / n;
    let s3 = |zeta: f64| a.iter().map(|&ai| (ai - zeta).powi(-3)).sum::<f64>() / n;
    let amax = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let amin = a.iter().copied().fold(f64::INFINITY, f64::min);
    // s2 decreases from +inf to 0 to the right of amax, and increases to +inf up to amin.
    let solve = |lo: f64, hi: f64, decreasing: bool| {
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (s2(mid) > 1.0) == decreasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let edge = |zeta: f64| WignerEdge { zeta, l: zeta - s1(zeta), varpi: s3(zeta).abs().cbrt() };
    [edge(solve(amin - 2.0, amin, false)), edge(solve(amax, amax + 2.0, true))]
}

/// About `n_points` values of `z` crossed with `etas`: energies shared between the bulk
/// `[L_- + tau', L_+ - tau']` and the two edge windows `L_± ± tau'`.
pub fn wigner_grid(a: &[f64], tau_prime: f64, n_points: usize, etas: &[f64]) -> Result<Vec<Complex64>> {
    let [lower, upper] = wigner_edge_points(a);
    let n_eta = etas.len();
    if n_eta == 0 || lower.l + tau_prime > upper.l - tau_prime {
        return Err(Error::EmptyDomain("wigner grid is empty".into()));
    }
    let ranges = [
        (lower.l + tau_prime, upper.l - tau_prime),
        (upper.l - tau_prime, upper.l + tau_prime),
        (lower.l - tau_prime, lower.l + tau_prime),
    ];
    let n_e = n_points.div_ceil(n_eta);
    let mut out = Vec::with_capacity(n_e * n_eta);
    for (j, &(lo, hi)) in ranges.iter().enumerate() {
        let share = n_e / ranges.len() + usize::from(j < n_e % ranges.len());
        for i in 0..share {
            let e = if share == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (share - 1) as f64 };
            out.extend(etas.iter().map(|&eta| Complex64::new(e, eta)));
        }
    }
    Ok(out)
}
