use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{apply, transpose_apply};
use crate::model_core::PopulationModel;

/// A population covariance `Sigma = O diag(sigma) O^T`. `basis = None` means `O = I`.
#[derive(Debug, Clone)]
pub struct PopulationCovariance {
    pub eigenvalues: Vec<f64>,
    pub basis: Option<Mat<f64>>,
}

impl PopulationCovariance {
    pub fn diagonal(eigenvalues: Vec<f64>) -> Self {
        Self { eigenvalues, basis: None }
    }

    /// The diagonal covariance realizing the model's atoms with multiplicities from its dimensions.
    pub fn from_model(model: &PopulationModel) -> Result<Self> {
        Ok(Self::diagonal(model.expand_eigenvalues()?))
    }

    pub fn with_basis(mut self, basis: Mat<f64>) -> Result<Self> {
        let m = self.eigenvalues.len();
        if basis.nrows() != m || basis.ncols() != m {
            return Err(Error::Dimension(format!("basis is {}x{}, expected {m}x{m}", basis.nrows(), basis.ncols())));
        }
        self.basis = Some(basis);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_positive(&self) -> bool {
        self.eigenvalues.iter().all(|&s| s > 0.0)
    }

    /// Coordinates of `v` in the eigenbasis, `O^T v`.
    pub fn to_eigen(&self, v: &[f64]) -> Vec<f64> {
        match &self.basis {
            Some(o) => transpose_apply(o.as_ref(), v),
            None => v.to_vec(),
        }
    }

    /// `O c`.
    pub fn from_eigen(&self, c: &[f64]) -> Vec<f64> {
        match &self.basis {
            Some(o) => apply(o.as_ref(), c),
            None => c.to_vec(),
        }
    }

    /// `Sigma^p v` for real `p`; zero eigenvalues map to zero.
    pub fn power_apply(&self, p: f64, v: &[f64]) -> Vec<f64> {
        let c: Vec<f64> = self
            .to_eigen(v)
            .iter()
            .zip(&self.eigenvalues)
            .map(|(&x, &s)| if s > 0.0 { x * s.powf(p) } else { 0.0 })
            .collect();
        self.from_eigen(&c)
    }

    /// `Sigma^{1/2} X`.
    pub fn sqrt_times(&self, x: MatRef<'_, f64>) -> Result<Mat<f64>> {
        let m = self.dim();
        if x.nrows() != m {
            return Err(Error::Dimension(format!("X has {} rows, Sigma is {m}x{m}", x.nrows())));
        }
        let sq: Vec<f64> = self.eigenvalues.iter().map(|s| s.max(0.0).sqrt()).collect();
        match &self.basis {
            None => Ok(Mat::from_fn(m, x.ncols(), |i, j| sq[i] * x[(i, j)])),
            Some(o) => {
                let ot_x = o.transpose() * x;
                let scaled = Mat::from_fn(m, x.ncols(), |i, j| sq[i] * ot_x[(i, j)]);
                Ok(o * scaled)
            }
        }
    }

    pub fn dense(&self) -> Mat<f64> {
        let m = self.dim();
        match &self.basis {
            None => Mat::from_fn(m, m, |i, j| if i == j { self.eigenvalues[i] } else { 0.0 }),
            Some(o) => {
                let scaled = Mat::from_fn(m, m, |i, j| o[(i, j)] * self.eigenvalues[j]);
                scaled * o.transpose()
            }
        }
    }

    pub fn dense_sqrt(&self) -> Mat<f64> {
        let m = self.dim();
        let id = Mat::<f64>::identity(m, m);
        self.sqrt_times(id.as_ref()).expect("square")
    }
}
