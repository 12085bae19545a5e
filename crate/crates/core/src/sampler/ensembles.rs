use faer::{Mat, MatRef};
use num_complex::Complex64;
use rayon::prelude::*;

use super::distribution::{EntryDistribution, Symmetry};
use super::rng::{row_rng, Tag};
use crate::error::{Error, Result};
use crate::linalg::{asymmetry, sym_eigen};

/// A realized random matrix with the data needed to reproduce it.
#[derive(Debug, Clone)]
pub struct EnsembleSample<T> {
    pub matrix: Mat<T>,
    pub seed: u64,
    pub trial: u64,
    pub dist: EntryDistribution,
}

fn rows_to_mat<T: Copy>(rows: Vec<Vec<T>>, ncols: usize) -> Mat<T> {
    Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

/// `X` with i.i.d. entries of variance `1/N`, `N = cols`, from the real law.
pub fn sample_x(dist: &EntryDistribution, rows: usize, cols: usize, seed: u64, trial: u64) -> Result<EnsembleSample<f64>> {
    let matrix = sample_real(dist, rows, cols, seed, trial, Tag::X)?;
    Ok(EnsembleSample { matrix, seed, trial, dist: dist.clone() })
}

pub(crate) fn sample_real(dist: &EntryDistribution, rows: usize, cols: usize, seed: u64, trial: u64, tag: Tag) -> Result<Mat<f64>> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension("empty matrix requested".into()));
    }
    let law = dist.realize()?;
    let scale = 1.0 / (cols as f64).sqrt();
    let data: Vec<Vec<f64>> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let mut rng = row_rng(seed, trial, tag, i as u64);
            (0..cols).map(|_| law.sample(&mut rng) * scale).collect()
        })
        .collect();
    Ok(rows_to_mat(data, cols))
}

/// Complex `X` with real and imaginary parts i.i.d. of variance `1/(2N)`.
pub fn sample_x_complex(dist: &EntryDistribution, rows: usize, cols: usize, seed: u64, trial: u64) -> Result<EnsembleSample<Complex64>> {
    let law = dist.realize()?;
    let scale = 1.0 / (2.0 * cols as f64).sqrt();
    let data: Vec<Vec<Complex64>> = (0..rows)
        .into_par_iter()
        .map(|i| {
            let mut rng = row_rng(seed, trial, Tag::X, i as u64);
            (0..cols)
                .map(|_| {
                    let re = law.sample(&mut rng);
                    let im = law.sample(&mut rng);
                    Complex64::new(re * scale, im * scale)
                })
                .collect()
        })
        .collect();
    let mut dist = dist.clone();
    dist.symmetry = Symmetry::Complex;
    Ok(EnsembleSample { matrix: rows_to_mat(data, cols), seed, trial, dist })
}

/// `Q = T X X^T T^T` (or the centered `Q_dot`) with its companion `X^T T^T T X`.
#[derive(Debug, Clone)]
pub struct CovarianceSample {
    pub q: Mat<f64>,
    pub companion: Mat<f64>,
    /// `T` after augmentation to a square `M x M` matrix.
    pub t: Mat<f64>,
    /// `X` after augmentation, `M x N`.
    pub x: Mat<f64>,
}

/// Builds `Q` from `T` (`M x Mhat`) and `X` (`Mhat x N`).
///
/// A non-square `T` is made square: when `Mhat > M` with zero rows (giving `Mhat x Mhat`
/// matrices with the same nonzero spectrum), when `Mhat < M` with zero columns and
/// `M - Mhat` independent rows appended to `X` drawn from `augment`.
pub fn build_covariance_model(
    t: MatRef<'_, f64>,
    x: MatRef<'_, f64>,
    dotted: bool,
    augment: Option<(&EntryDistribution, u64, u64)>,
) -> Result<CovarianceSample> {
    let (m, m_hat) = (t.nrows(), t.ncols());
    if x.nrows() != m_hat {
        return Err(Error::Dimension(format!("T is {m}x{m_hat} but X has {} rows", x.nrows())));
    }
    let n = x.ncols();
    let (t_sq, x_sq): (Mat<f64>, Mat<f64>) = if m_hat >= m {
        let t_sq = Mat::from_fn(m_hat, m_hat, |i, j| if i < m { t[(i, j)] } else { 0.0 });
        (t_sq, x.to_owned())
    } else {
        let (dist, seed, trial) =
            augment.ok_or_else(|| Error::Dimension("T has fewer columns than rows; an augmentation law is required".into()))?;
        let extra = sample_real(dist, m - m_hat, n, seed, trial, Tag::Augment)?;
        let t_sq = Mat::from_fn(m, m, |i, j| if j < m_hat { t[(i, j)] } else { 0.0 });
        let x_sq = Mat::from_fn(m, n, |i, j| if i < m_hat { x[(i, j)] } else { extra[(i - m_hat, j)] });
        (t_sq, x_sq)
    };
    let xc = if dotted {
        if n < 2 {
            return Err(Error::Dimension("centering needs N >= 2".into()));
        }
        let means: Vec<f64> = (0..x_sq.nrows()).map(|i| x_sq.row(i).iter().sum::<f64>() / n as f64).collect();
        Mat::from_fn(x_sq.nrows(), n, |i, j| x_sq[(i, j)] - means[i])
    } else {
        x_sq.clone()
    };
    let c = if dotted { n as f64 / (n as f64 - 1.0) } else { 1.0 };
    let tx = &t_sq * &xc;
    let mut q = &tx * tx.transpose();
    let mut companion = tx.transpose() * &tx;
    q *= faer::Scale(c);
    companion *= faer::Scale(c);
    symmetrize(&mut q);
    symmetrize(&mut companion);
    Ok(CovarianceSample { q, companion, t: t_sq, x: x_sq })
}

fn symmetrize(a: &mut Mat<f64>) {
    let n = a.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// `H = W + A` with `W` symmetric, all entries of variance `1/N`.
pub fn sample_deformed_wigner(
    dist: &EntryDistribution,
    a: MatRef<'_, f64>,
    seed: u64,
    trial: u64,
) -> Result<EnsembleSample<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension("A must be square".into()));
    }
    let asym = asymmetry(a);
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let law = dist.realize()?;
    let scale = 1.0 / (n as f64).sqrt();
    // Row i holds the upper-triangular entries (i, i..n).
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = row_rng(seed, trial, Tag::Wigner, i as u64);
            (i..n).map(|_| law.sample(&mut rng) * scale).collect()
        })
        .collect();
    let matrix = Mat::from_fn(n, n, |i, j| {
        let w = if i <= j { upper[i][j - i] } else { upper[j][i - j] };
        w + a[(i, j)]
    });
    Ok(EnsembleSample { matrix, seed, trial, dist: dist.clone() })
}

/// Gaussian reference ensemble: GOE (`beta = 1`, diagonal variance `2/N`) or GUE (`beta = 2`).
pub fn gaussian_reference(beta: u8, n: usize, seed: u64, trial: u64) -> Result<Vec<f64>> {
    let scale = 1.0 / (n as f64).sqrt();
    match beta {
        1 => {
            let upper: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = row_rng(seed, trial, Tag::Reference, i as u64);
                    (i..n)
                        .map(|j| {
                            let g: f64 = rng.sample(rand_distr::StandardNormal);
                            if i == j { g * scale * 2f64.sqrt() } else { g * scale }
                        })
                        .collect()
                })
                .collect();
            let h = Mat::from_fn(n, n, |i, j| if i <= j { upper[i][j - i] } else { upper[j][i - j] });
            crate::linalg::sym_eigenvalues(h.as_ref())
        }
        2 => {
            let upper: Vec<Vec<Complex64>> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = row_rng(seed, trial, Tag::Reference, i as u64);
                    (i..n)
                        .map(|j| {
                            let a: f64 = rng.sample(rand_distr::StandardNormal);
                            let b: f64 = rng.sample(rand_distr::StandardNormal);
                            if i == j {
                                Complex64::new(a * scale, 0.0)
                            } else {
                                Complex64::new(a, b) * (scale / 2f64.sqrt())
                            }
                        })
                        .collect()
                })
                .collect();
            let h = Mat::from_fn(n, n, |i, j| if i <= j { upper[i][j - i] } else { upper[j][i - j].conj() });
            crate::linalg::herm_eigenvalues(h.as_ref())
        }
        _ => Err(Error::InvalidModel(format!("beta must be 1 or 2, got {beta}"))),
    }
}

use rand::Rng;

/// A Haar-distributed orthogonal matrix, taken from the eigenvectors of a GOE sample.
pub fn random_orthogonal(n: usize, seed: u64, trial: u64) -> Result<Mat<f64>> {
    let upper: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut rng = row_rng(seed, trial, Tag::Rotation, i as u64);
            (i..n).map(|_| rng.sample(rand_distr::StandardNormal)).collect()
        })
        .collect();
    let h = Mat::from_fn(n, n, |i, j| if i <= j { upper[i][j - i] } else { upper[j][i - j] });
    let (_, mut u) = sym_eigen(h.as_ref())?;
    // Eigenvector signs are not random; flip them with independent coins.
    let mut rng = row_rng(seed, trial, Tag::Rotation, n as u64);
    for j in 0..n {
        if rng.random::<bool>() {
            for i in 0..n {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigenvalues;

    #[test]
    fn reproducible_and_scaled() {
        let d = EntryDistribution::rademacher();
        let a = sample_x(&d, 20, 30, 11, 0).unwrap();
        let b = sample_x(&d, 20, 30, 11, 0).unwrap();
        assert!(a.matrix == b.matrix);
        let s = 1.0 / 30f64.sqrt();
        for j in 0..30 {
            for i in 0..20 {
                assert!((a.matrix[(i, j)].abs() - s).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn complex_entries_have_vanishing_square_mean() {
        let x = sample_x_complex(&EntryDistribution::gaussian(), 100, 100, 5, 0).unwrap().matrix;
        let mut sq = Complex64::new(0.0, 0.0);
        let mut abs2 = 0.0;
        for j in 0..100 {
            for i in 0..100 {
                sq += x[(i, j)] * x[(i, j)];
                abs2 += x[(i, j)].norm_sqr();
            }
        }
        // E|X|^2 = 1/N; the sum of X^2 over 1e4 entries has sd 1e-2 / N * 100.
        assert!((abs2 / 1e4 - 0.01).abs() < 5.0 * 0.01 / 100.0);
        assert!(sq.norm() / 1e4 < 5.0 * 0.01 / 100.0);
    }

    #[test]
    fn nonzero_spectra_agree() {
        let d = EntryDistribution::gaussian();
        let t = sample_x(&d, 20, 30, 1, 0).unwrap().matrix;
        let x = sample_x(&d, 30, 25, 2, 0).unwrap().matrix;
        let cov = build_covariance_model(t.as_ref(), x.as_ref(), false, None).unwrap();
        let mut a = sym_eigenvalues(cov.q.as_ref()).unwrap();
        let mut b = sym_eigenvalues(cov.companion.as_ref()).unwrap();
        a.reverse();
        b.reverse();
        let r = a.len().min(b.len());
        for k in 0..r {
            if a[k] > 1e-8 {
                assert!((a[k] - b[k]).abs() < 1e-10, "{} vs {}", a[k], b[k]);
            }
        }
    }

    #[test]
    fn tall_t_is_augmented() {
        let d = EntryDistribution::gaussian();
        let t = sample_x(&d, 20, 12, 1, 0).unwrap().matrix;
        let x = sample_x(&d, 12, 40, 2, 0).unwrap().matrix;
        let cov = build_covariance_model(t.as_ref(), x.as_ref(), false, Some((&d, 3, 0))).unwrap();
        let direct = {
            let tx = &t * &x;
            &tx * tx.transpose()
        };
        assert_eq!(cov.q.nrows(), 20);
        let diff = &cov.q - &direct;
        assert!(diff.norm_max() < 1e-12);
    }

    #[test]
    fn dotted_model_ignores_row_shifts() {
        let d = EntryDistribution::gaussian();
        let t = sample_x(&d, 10, 10, 1, 0).unwrap().matrix;
        let x = sample_x(&d, 10, 20, 2, 0).unwrap().matrix;
        let shifted = Mat::from_fn(10, 20, |i, j| x[(i, j)] + 0.3 * i as f64);
        let a = build_covariance_model(t.as_ref(), x.as_ref(), true, None).unwrap();
        let b = build_covariance_model(t.as_ref(), shifted.as_ref(), true, None).unwrap();
        assert!((&a.q - &b.q).norm_max() < 1e-12);
    }

    #[test]
    fn wigner_is_symmetric() {
        let a = Mat::<f64>::zeros(50, 50);
        let w = sample_deformed_wigner(&EntryDistribution::gaussian(), a.as_ref(), 3, 0).unwrap();
        assert_eq!(asymmetry(w.matrix.as_ref()), 0.0);
        let bad = Mat::from_fn(3, 3, |i, j| (i * 3 + j) as f64);
        assert!(sample_deformed_wigner(&EntryDistribution::gaussian(), bad.as_ref(), 3, 0).is_err());
    }

    #[test]
    fn orthogonal_matrix() {
        let o = random_orthogonal(30, 4, 0).unwrap();
        let id = o.transpose() * &o;
        assert!((&id - Mat::<f64>::identity(30, 30)).norm_max() < 1e-12);
    }
}
