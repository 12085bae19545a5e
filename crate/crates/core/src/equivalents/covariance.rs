use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::PopulationCovariance;
use crate::error::{Error, Result};
use crate::model_core::{solve_m, PopulationModel, SolverSettings};

/// Which equivalent an [`EquivalentSet`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Plain,
    Dotted,
    Wigner,
}

/// `Psi(z) = sqrt(Im m / (N eta)) + 1 / (N eta)`.
pub fn psi(z: Complex64, m: Complex64, n: usize) -> f64 {
    let n_eta = n as f64 * z.im;
    (m.im.max(0.0) / n_eta).sqrt() + 1.0 / n_eta
}

/// Deterministic equivalents at one spectral parameter, stored in the eigenbasis of `Sigma`.
///
/// `Pi = diag(-Sigma (1 + m Sigma)^{-1}, m)` and `R_M ~ -(z (1 + m Sigma))^{-1}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalentSet {
    pub z: Complex64,
    pub m: Complex64,
    /// Eigenvalues of the upper block of `Pi`, `-sigma_i / (1 + m sigma_i)`.
    pub pi_upper: Vec<Complex64>,
    pub pi_lower_scalar: Complex64,
    /// Eigenvalues of the `R_M` equivalent, `-1 / (z (1 + m sigma_i))`.
    pub rm_equiv: Vec<Complex64>,
    pub psi: f64,
    pub variant: Variant,
    #[serde(skip)]
    sigma: Vec<f64>,
    n: usize,
}

/// Smallest accepted `|1 + m sigma_i|`.
pub const EQUIVALENT_GUARD: f64 = 1e-10;

pub fn build_equivalents(
    z: Complex64,
    model: &PopulationModel,
    sigma: &PopulationCovariance,
    settings: &SolverSettings,
) -> Result<EquivalentSet> {
    let n = model.dims()?.n;
    let m = solve_m(z, model, settings)?.m;
    from_m(z, m, sigma, n)
}

/// Equivalents for a given value of `m`, which need not solve the defining equation.
pub fn from_m(z: Complex64, m: Complex64, sigma: &PopulationCovariance, n: usize) -> Result<EquivalentSet> {
    let mut pi_upper = Vec::with_capacity(sigma.dim());
    let mut rm_equiv = Vec::with_capacity(sigma.dim());
    for (i, &s) in sigma.eigenvalues.iter().enumerate() {
        let d = 1.0 + m * s;
        if d.norm() < EQUIVALENT_GUARD {
            return Err(Error::SingularEquivalent { index: i, value: d.norm() });
        }
        pi_upper.push(-s / d);
        rm_equiv.push(-1.0 / (z * d));
    }
    Ok(EquivalentSet {
        z,
        m,
        pi_upper,
        pi_lower_scalar: m,
        rm_equiv,
        psi: if z.im > 0.0 { psi(z, m, n) } else { f64::INFINITY },
        variant: Variant::Plain,
        sigma: sigma.eigenvalues.clone(),
        n,
    })
}

impl EquivalentSet {
    pub fn m_dim(&self) -> usize {
        self.pi_upper.len()
    }

    pub fn n_dim(&self) -> usize {
        self.n
    }

    /// `<v, Pi w>` with the upper components given in the eigenbasis of `Sigma`.
    pub fn entry(&self, v_m_eig: &[f64], v_n: &[f64], w_m_eig: &[f64], w_n: &[f64]) -> Complex64 {
        let upper: Complex64 = self
            .pi_upper
            .iter()
            .zip(v_m_eig.iter().zip(w_m_eig))
            .map(|(p, (a, b))| p * (a * b))
            .sum();
        let lower: f64 = v_n.iter().zip(w_n).map(|(a, b)| a * b).sum();
        upper + self.pi_lower_scalar * lower
    }

    /// `<v, Sigma_ul^{-1} Pi Sigma_ul^{-1} w>` minus the `-<v, Sigma^{-1} w>` term of `G`.
    ///
    /// The difference `-m (1 + m Sigma)^{-1}` on the upper block avoids cancellation when
    /// comparing with the factorized resolvent.
    pub fn conjugated_upper_shift(&self) -> Vec<Complex64> {
        self.sigma.iter().map(|&s| -self.m / (1.0 + self.m * s)).collect()
    }

    /// `(1/M) tr R_M` for the equivalent.
    pub fn mean_rm(&self) -> Complex64 {
        self.rm_equiv.iter().sum::<Complex64>() / self.m_dim() as f64
    }

    /// Residual of `(1/M) tr R_M = (1/M) tr R_N - ((phi - 1)/phi)(1/z)` with `tr R_N ~ N m`.
    pub fn consistency_residual(&self) -> f64 {
        let phi = self.m_dim() as f64 / self.n as f64;
        let rhs = self.m / phi - (phi - 1.0) / (phi * self.z);
        (self.mean_rm() - rhs).norm()
    }

    /// Upper bound on the operator norm of `Pi`.
    pub fn operator_norm(&self) -> f64 {
        self.pi_upper
            .iter()
            .map(|p| p.norm())
            .fold(self.pi_lower_scalar.norm(), f64::max)
    }

    pub fn dotted(&self) -> DottedPi {
        let mut base = self.clone();
        base.variant = Variant::Dotted;
        DottedPi { shift: self.m + 1.0 / self.z, base }
    }
}

/// `Pi - (m + 1/z) e e*` with `e = N^{-1/2}(1, ..., 1)` on the lower block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DottedPi {
    pub base: EquivalentSet,
    pub shift: Complex64,
}

impl DottedPi {
    pub fn entry(&self, v_m_eig: &[f64], v_n: &[f64], w_m_eig: &[f64], w_n: &[f64]) -> Complex64 {
        let scale = 1.0 / (v_n.len() as f64).sqrt();
        let ve: f64 = v_n.iter().sum::<f64>() * scale;
        let we: f64 = w_n.iter().sum::<f64>() * scale;
        self.base.entry(v_m_eig, v_n, w_m_eig, w_n) - self.shift * (ve * we)
    }

    /// `||Pi_dot - Pi||_F`.
    pub fn frobenius_shift(&self) -> f64 {
        self.shift.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp_set(phi: f64, n: usize, z: Complex64) -> EquivalentSet {
        let model = PopulationModel::identity(phi, Some(n)).unwrap();
        let sigma = PopulationCovariance::from_model(&model).unwrap();
        build_equivalents(z, &model, &sigma, &SolverSettings::default()).unwrap()
    }

    #[test]
    fn identity_covariance_reduces_to_scalars() {
        let z = Complex64::new(1.0, 0.2);
        let eq = mp_set(0.25, 400, z);
        let m = eq.m;
        for (p, r) in eq.pi_upper.iter().zip(&eq.rm_equiv) {
            assert!((p + 1.0 / (1.0 + m)).norm() < 1e-15);
            assert!((r + 1.0 / (z * (1.0 + m))).norm() < 1e-15);
        }
    }

    #[test]
    fn boundary_rm_equivalent() {
        let eq = mp_set(0.25, 400, Complex64::new(1.0, 0.0));
        let expected = -1.0 / Complex64::new(0.125, 0.9375f64.sqrt() / 2.0);
        assert!((eq.rm_equiv[0] - expected).norm() < 1e-9);
    }

    #[test]
    fn psi_values() {
        assert!((psi(Complex64::new(0.0, 1.0), Complex64::new(0.3, 0.0), 100) - 0.01).abs() < 1e-15);
        let eq = mp_set(0.25, 1000, Complex64::new(1.0, 0.01));
        let expected = (eq.m.im / 10.0).sqrt() + 0.1;
        assert!((eq.psi - expected).abs() < 1e-15);
        assert!((eq.psi - 0.32004).abs() < 1e-3, "{}", eq.psi);
        let half = psi(Complex64::new(1.0, 0.005), eq.m, 1000);
        let a = (eq.m.im / 10.0).sqrt();
        assert!((half - (a * 2f64.sqrt() + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn dotted_rank_one_structure() {
        let n = 50;
        let z = Complex64::new(0.7, 0.3);
        let eq = mp_set(0.5, n, z);
        let dot = eq.dotted();
        let zeros = vec![0.0; eq.m_dim()];
        let e = vec![1.0 / (n as f64).sqrt(); n];
        assert!((dot.entry(&zeros, &e, &zeros, &e) + 1.0 / z).norm() < 1e-13);
        let mut w = vec![0.0; n];
        w[0] = 1.0 / 2f64.sqrt();
        w[1] = -1.0 / 2f64.sqrt();
        assert!((dot.entry(&zeros, &w, &zeros, &w) - eq.m).norm() < 1e-14);
        assert!((dot.frobenius_shift() - (eq.m + 1.0 / z).norm()).abs() < 1e-15);
    }
}
