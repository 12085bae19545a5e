use faer::{Mat, MatRef};
use rand::Rng;

use super::rng::{row_rng, Tag};
use crate::error::{Error, Result};

/// `X^theta = chi X^1 + (1 - chi) X^0` entrywise with i.i.d. `chi ~ Bernoulli(theta)`.
///
/// Returns the interpolated matrix and the number of entries taken from `X^1`.
pub fn bernoulli_interpolate(
    x0: MatRef<'_, f64>,
    x1: MatRef<'_, f64>,
    theta: f64,
    seed: u64,
    trial: u64,
) -> Result<(Mat<f64>, usize)> {
    if x0.nrows() != x1.nrows() || x0.ncols() != x1.ncols() {
        return Err(Error::Dimension(format!(
            "shapes {}x{} and {}x{} differ",
            x0.nrows(),
            x0.ncols(),
            x1.nrows(),
            x1.ncols()
        )));
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidModel(format!("theta = {theta} outside [0, 1]")));
    }
    let (rows, cols) = (x0.nrows(), x0.ncols());
    let mask: Vec<Vec<bool>> = (0..rows)
        .map(|i| {
            let mut rng = row_rng(seed, trial, Tag::Bernoulli, i as u64);
            (0..cols).map(|_| rng.random::<f64>() < theta).collect()
        })
        .collect();
    let taken = mask.iter().flatten().filter(|&&b| b).count();
    let out = Mat::from_fn(rows, cols, |i, j| if mask[i][j] { x1[(i, j)] } else { x0[(i, j)] });
    Ok((out, taken))
}

/// `K_1, ..., K_{n_max}` from `sum_n K_n t^n = (E e^{t X^1} - E e^{t X^0}) / E e^{t X^theta}`.
///
/// `moments0[k-1] = E (X^0)^k`; the law of `X^theta` is the `theta`-mixture.
pub fn k_coefficients(moments0: &[f64], moments1: &[f64], theta: f64, n_max: usize) -> Result<Vec<f64>> {
    if n_max > moments0.len() || n_max > moments1.len() {
        return Err(Error::Moments(format!(
            "{n_max} coefficients need {n_max} moments, got {} and {}",
            moments0.len(),
            moments1.len()
        )));
    }
    // Exponential generating series: coefficient of t^n is m_n / n!.
    let mut fact = 1.0;
    let mut num = vec![0.0; n_max + 1];
    let mut den = vec![0.0; n_max + 1];
    den[0] = 1.0;
    for n in 1..=n_max {
        fact *= n as f64;
        let (a, b) = (moments0[n - 1], moments1[n - 1]);
        num[n] = (b - a) / fact;
        den[n] = (theta * b + (1.0 - theta) * a) / fact;
    }
    let mut q = vec![0.0; n_max + 1];
    for n in 0..=n_max {
        q[n] = num[n] - (1..=n).map(|j| den[j] * q[n - j]).sum::<f64>();
    }
    Ok(q[1..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{sample_x, EntryDistribution};

    #[test]
    fn endpoints_and_fraction() {
        let x0 = sample_x(&EntryDistribution::gaussian(), 40, 50, 1, 0).unwrap().matrix;
        let x1 = sample_x(&EntryDistribution::rademacher(), 40, 50, 2, 0).unwrap().matrix;
        let (a, k) = bernoulli_interpolate(x0.as_ref(), x1.as_ref(), 0.0, 9, 0).unwrap();
        assert!(a == x0 && k == 0);
        let (b, k) = bernoulli_interpolate(x0.as_ref(), x1.as_ref(), 1.0, 9, 0).unwrap();
        assert!(b == x1 && k == 2000);
        let (_, k) = bernoulli_interpolate(x0.as_ref(), x1.as_ref(), 0.3, 9, 0).unwrap();
        let sd = (2000.0f64 * 0.3 * 0.7).sqrt();
        assert!((k as f64 - 600.0).abs() < 5.0 * sd);
    }

    #[test]
    fn third_moment_coefficient() {
        let n = 100.0f64;
        let v = 1.0 / n;
        let s1 = 2.0 * n.powf(-1.5);
        let k = k_coefficients(&[0.0, v, 0.0], &[0.0, v, s1], 0.4, 3).unwrap();
        assert_eq!(k[0], 0.0);
        assert_eq!(k[1], 0.0);
        assert!((k[2] - n.powf(-1.5) / 3.0).abs() < 1e-18);
        assert!(k_coefficients(&[0.0], &[0.0], 0.5, 2).is_err());
    }
}
