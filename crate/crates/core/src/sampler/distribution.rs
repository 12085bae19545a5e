use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of `sqrt(N) X_{i mu}` (mean 0, variance 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EntryLaw {
    Gaussian,
    Rademacher,
    /// Standardized Bernoulli(p).
    ShiftedBernoulli { p: f64 },
    /// Values `a < 0 < b` with the probabilities giving mean zero, then standardized.
    TwoPoint { a: f64, b: f64 },
    /// Standardized moments `m_1, ..., m_n` (`m_1 = 0`, `m_2 = 1`), realized by a discrete law
    /// with at most four atoms.
    UserMoments { moments: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    #[default]
    Real,
    /// Real and imaginary parts i.i.d. with variance 1/2 each, so `E X^2 = 0`.
    Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDistribution {
    #[serde(flatten)]
    pub law: EntryLaw,
    #[serde(default)]
    pub symmetry: Symmetry,
}

/// A ready-to-sample realization of an [`EntryLaw`].
#[derive(Debug, Clone)]
pub enum Realized {
    Gaussian,
    Discrete { nodes: Vec<f64>, cumulative: Vec<f64> },
}

impl EntryDistribution {
    pub fn gaussian() -> Self {
        Self { law: EntryLaw::Gaussian, symmetry: Symmetry::Real }
    }

    pub fn rademacher() -> Self {
        Self { law: EntryLaw::Rademacher, symmetry: Symmetry::Real }
    }

    pub fn complex(mut self) -> Self {
        self.symmetry = Symmetry::Complex;
        self
    }

    pub fn realize(&self) -> Result<Realized> {
        let (nodes, weights) = match &self.law {
            EntryLaw::Gaussian => return Ok(Realized::Gaussian),
            EntryLaw::Rademacher => (vec![-1.0, 1.0], vec![0.5, 0.5]),
            EntryLaw::ShiftedBernoulli { p } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::Moments(format!("Bernoulli parameter {p} outside (0, 1)")));
                }
                let sd = (p * (1.0 - p)).sqrt();
                (vec![-p / sd, (1.0 - p) / sd], vec![1.0 - p, *p])
            }
            EntryLaw::TwoPoint { a, b } => {
                if !(*a < 0.0 && *b > 0.0) {
                    return Err(Error::Moments(format!("two-point law needs a < 0 < b, got {a}, {b}")));
                }
                let pb = -a / (b - a);
                let sd = (-a * b).sqrt();
                (vec![a / sd, b / sd], vec![1.0 - pb, pb])
            }
            EntryLaw::UserMoments { moments } => fit_moments(moments)?,
        };
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Realized::Discrete { nodes, cumulative })
    }

    /// Raw moments `E Y^k`, `k = 1..=n`, of the real standardized law.
    pub fn moments(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.realize()?.moments(n))
    }
}

impl Realized {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Realized::Gaussian => rng.sample(StandardNormal),
            Realized::Discrete { nodes, cumulative } => {
                let u: f64 = rng.random();
                let i = cumulative.iter().position(|&c| u < c).unwrap_or(nodes.len() - 1);
                nodes[i]
            }
        }
    }

    pub fn moments(&self, n: usize) -> Vec<f64> {
        match self {
            Realized::Gaussian => (1..=n)
                .map(|k| if k % 2 == 1 { 0.0 } else { (1..k).step_by(2).map(|j| j as f64).product() })
                .collect(),
            Realized::Discrete { nodes, cumulative } => {
                let weights: Vec<f64> = cumulative
                    .iter()
                    .scan(0.0, |prev, &c| {
                        let w = c - *prev;
                        *prev = c;
                        Some(w)
                    })
                    .collect();
                (1..=n as i32)
                    .map(|k| nodes.iter().zip(&weights).map(|(x, w)| w * x.powi(k)).sum())
                    .collect()
            }
        }
    }
}

const MAX_NODES: usize = 4;

/// Gauss quadrature rule matching `1, m_1, ..., m_n` (Golub-Welsch via a Hankel Cholesky factor).
///
/// The highest moment needed by the rule but not supplied is set to zero.
pub fn fit_moments(moments: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = moments.len();
    if n < 2 {
        return Err(Error::Moments("at least the first two moments are required".into()));
    }
    if moments[0].abs() > 1e-12 || (moments[1] - 1.0).abs() > 1e-12 {
        return Err(Error::Moments(format!("mean {} and variance {} must be 0 and 1", moments[0], moments[1])));
    }
    let mut k = (n / 2 + 1).min(MAX_NODES);
    let mom = |j: usize| if j == 0 { 1.0 } else { moments.get(j - 1).copied().unwrap_or(0.0) };

    let (alpha, beta) = loop {
        // Rows 0..k of the upper Cholesky factor of the (k+1)x(k+1) Hankel matrix.
        let mut r = vec![vec![0.0; k + 1]; k];
        let mut singular_at = None;
        for i in 0..k {
            let d = mom(2 * i) - (0..i).map(|l| r[l][i] * r[l][i]).sum::<f64>();
            if d <= 1e-10 * mom(2 * i).abs().max(1.0) {
                if d < -1e-8 * mom(2 * i).abs().max(1.0) {
                    return Err(Error::Moments("Hankel matrix is not positive semidefinite".into()));
                }
                singular_at = Some(i);
                break;
            }
            r[i][i] = d.sqrt();
            for j in i + 1..=k {
                r[i][j] = (mom(i + j) - (0..i).map(|l| r[l][i] * r[l][j]).sum::<f64>()) / r[i][i];
            }
        }
        if let Some(i) = singular_at {
            k = i;
            continue;
        }
        let alpha: Vec<f64> = (0..k)
            .map(|j| r[j][j + 1] / r[j][j] - if j == 0 { 0.0 } else { r[j - 1][j] / r[j - 1][j - 1] })
            .collect();
        let beta: Vec<f64> = (0..k.saturating_sub(1)).map(|j| r[j + 1][j + 1] / r[j][j]).collect();
        break (alpha, beta);
    };

    let jac = faer::Mat::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i == j + 1 {
            beta[j]
        } else if j == i + 1 {
            beta[i]
        } else {
            0.0
        }
    });
    let (nodes, vecs) = crate::linalg::sym_eigen(jac.as_ref())?;
    let weights: Vec<f64> = (0..k).map(|j| vecs[(0, j)] * vecs[(0, j)]).collect();

    let fitted = Realized::Discrete {
        nodes: nodes.clone(),
        cumulative: weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect(),
    }
    .moments(n);
    for (j, (f, m)) in fitted.iter().zip(moments).enumerate() {
        if (f - m).abs() > 1e-8 * m.abs().max(1.0) {
            return Err(Error::Moments(format!(
                "moment {} = {m} is not attained by a law with at most {MAX_NODES} atoms (got {f})",
                j + 1
            )));
        }
    }
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let m = EntryDistribution::gaussian().moments(8).unwrap();
        assert_eq!(m, vec![0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0]);
    }

    #[test]
    fn fits_rademacher_with_two_atoms() {
        let (x, w) = fit_moments(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(x.len(), 2);
        assert!((x[0] + 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!((w[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fits_six_moments_with_four_atoms() {
        let target = [0.0, 1.0, 0.5, 3.2, 2.0, 14.0];
        let (x, w) = fit_moments(&target).unwrap();
        assert_eq!(x.len(), 4);
        for k in 1..=6 {
            let mk: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            assert!((mk - target[k as usize - 1]).abs() < 1e-9, "moment {k}: {mk}");
        }
    }

    #[test]
    fn rejects_infeasible_moments() {
        // Kurtosis below 1 + skewness^2 is impossible.
        assert!(fit_moments(&[0.0, 1.0, 0.0, 0.5]).is_err());
        assert!(fit_moments(&[0.1, 1.0]).is_err());
    }

    #[test]
    fn config_json() {
        let d: EntryDistribution = serde_json::from_str(r#"{"kind": "two-point", "a": -1.0, "b": 2.0}"#).unwrap();
        let m = d.moments(2).unwrap();
        assert!(m[0].abs() < 1e-15 && (m[1] - 1.0).abs() < 1e-14);
        let d: EntryDistribution = serde_json::from_str(r#"{"kind": "gaussian", "symmetry": "complex"}"#).unwrap();
        assert_eq!(d.symmetry, Symmetry::Complex);
    }
}
