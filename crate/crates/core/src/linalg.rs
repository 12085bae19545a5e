//! Thin wrappers over faer decompositions.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues of a real symmetric matrix, increasing.
pub fn sym_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))
}

/// Eigenvalues (increasing) and orthonormal eigenvectors (columns) of a real symmetric matrix.
pub fn sym_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))?;
    let vals = evd.S().column_vector().iter().copied().collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigenvalues of a complex Hermitian matrix, increasing.
pub fn herm_eigenvalues(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("{e:?}")))
}

/// Thin SVD `a = U diag(s) V^T` with singular values decreasing.
pub fn thin_svd(a: MatRef<'_, f64>) -> Result<(Mat<f64>, Vec<f64>, Mat<f64>)> {
    if a.as_ref().is_all_finite() {
        let svd = a.thin_svd().map_err(|e| Error::Decomposition(format!("{e:?}")))?;
        let s = svd.S().column_vector().iter().copied().collect();
        Ok((svd.U().to_owned(), s, svd.V().to_owned()))
    } else {
        Err(Error::Decomposition("non-finite entries".into()))
    }
}

/// Largest entrywise asymmetry `|a_ij - a_ji|`.
pub fn asymmetry(a: MatRef<'_, f64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in j + 1..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// `M^T v` for a column-major matrix.
pub fn transpose_apply(m: MatRef<'_, f64>, v: &[f64]) -> Vec<f64> {
    (0..m.ncols())
        .map(|j| m.col(j).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// `M v`.
pub fn apply(m: MatRef<'_, f64>, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj != 0.0 {
            for (o, &a) in out.iter_mut().zip(m.col(j).iter()) {
                *o += a * vj;
            }
        }
    }
    out
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
