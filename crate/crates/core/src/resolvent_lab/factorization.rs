use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, MatRef};
use num_complex::Complex64;

use crate::covariance::PopulationCovariance;
use crate::error::{Error, Result};
use crate::linalg::{dot, thin_svd};

/// `Sigma^{1/2} X = sum_k sqrt(lambda_k) xi_k zeta_k^T`, from which `G(z)` is assembled for any `z`.
#[derive(Debug, Clone)]
pub struct ResolventFactorization {
    pub m: usize,
    pub n: usize,
    /// Eigenvalues of `X^T Sigma X` carried by the singular vectors, decreasing.
    pub lambda: Vec<f64>,
    pub xi: Mat<f64>,
    pub zeta: Mat<f64>,
    pub sigma: PopulationCovariance,
    /// Columns `Sigma^{1/2} xi_k`.
    sqrt_xi: Mat<f64>,
    /// Columns `Sigma^{-1/2} xi_k`; zero columns when `Sigma` is singular.
    inv_sqrt_xi: Mat<f64>,
}

pub fn factorize(sigma: &PopulationCovariance, x: MatRef<'_, f64>) -> Result<ResolventFactorization> {
    let y = sigma.sqrt_times(x)?;
    let (xi, s, zeta) = thin_svd(y.as_ref())?;
    let (m, n) = (x.nrows(), x.ncols());
    let r = s.len();
    let lambda: Vec<f64> = s.iter().map(|v| v * v).collect();
    let col = |k: usize| xi.col(k).iter().copied().collect::<Vec<f64>>();
    let mut sqrt_xi = Mat::zeros(m, r);
    let mut inv_sqrt_xi = Mat::zeros(m, r);
    let positive = sigma.is_positive();
    for k in 0..r {
        let c = col(k);
        let a = sigma.power_apply(0.5, &c);
        let b = if positive { sigma.power_apply(-0.5, &c) } else { vec![0.0; m] };
        for i in 0..m {
            sqrt_xi[(i, k)] = a[i];
            inv_sqrt_xi[(i, k)] = b[i];
        }
    }
    Ok(ResolventFactorization { m, n, lambda, xi, zeta, sigma: sigma.clone(), sqrt_xi, inv_sqrt_xi })
}

/// Data of one test vector `v = (v_M, v_N)` needed for generalized entries.
#[derive(Debug, Clone)]
pub struct Projection {
    pub vm: Vec<f64>,
    pub vn: Vec<f64>,
    /// `O^T v_M`.
    pub vm_eig: Vec<f64>,
    /// `sqrt(lambda_k) <Sigma^{1/2} xi_k, v_M> + <zeta_k, v_N>`.
    pub p: Vec<f64>,
    /// The same with `Sigma^{-1/2}`, i.e. for the vector `Sigma_ul^{-1} v`.
    pub p_inv: Vec<f64>,
    /// `<zeta_k, v_N>`.
    pub q: Vec<f64>,
}

impl ResolventFactorization {
    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    pub fn project(&self, v: &[f64]) -> Projection {
        let (vm, vn) = v.split_at(self.m);
        let r = self.rank();
        let mut p = Vec::with_capacity(r);
        let mut p_inv = Vec::with_capacity(r);
        let mut q = Vec::with_capacity(r);
        for k in 0..r {
            let sl = self.lambda[k].sqrt();
            let qk: f64 = self.zeta.col(k).iter().zip(vn).map(|(a, b)| a * b).sum();
            let a: f64 = self.sqrt_xi.col(k).iter().zip(vm).map(|(a, b)| a * b).sum();
            let b: f64 = self.inv_sqrt_xi.col(k).iter().zip(vm).map(|(a, b)| a * b).sum();
            p.push(sl * a + qk);
            p_inv.push(sl * b + qk);
            q.push(qk);
        }
        Projection { vm: vm.to_vec(), vn: vn.to_vec(), vm_eig: self.sigma.to_eigen(vm), p, p_inv, q }
    }

    /// `1 / (lambda_k - z)`.
    pub fn kernel(&self, z: Complex64) -> Vec<Complex64> {
        self.lambda.iter().map(|&l| 1.0 / (l - z)).collect()
    }

    // Sum over the singular triples plus the projector term on the kernel of the lower block.
    fn resolvent_part(&self, z: Complex64, d: &[Complex64], pv: &[f64], pw: &[f64], v: &Projection, w: &Projection) -> Complex64 {
        let mut acc: Complex64 = d.iter().zip(pv.iter().zip(pw)).map(|(d, (a, b))| d * (a * b)).sum();
        if self.n > self.rank() {
            acc += -(dot(&v.vn, &w.vn) - dot(&v.q, &w.q)) / z;
        }
        acc
    }

    /// `<v, G(z) w>`.
    pub fn entry(&self, z: Complex64, v: &Projection, w: &Projection) -> Complex64 {
        let d = self.kernel(z);
        self.entry_with(z, &d, v, w)
    }

    pub fn entry_with(&self, z: Complex64, d: &[Complex64], v: &Projection, w: &Projection) -> Complex64 {
        let sw = self.sigma.power_apply(1.0, &w.vm);
        let constant = -dot(&v.vm, &sw);
        constant + self.resolvent_part(z, d, &v.p, &w.p, v, w)
    }

    /// `<v, Sigma_ul^{-1} (G(z) - Pi) Sigma_ul^{-1} w>` where `Pi` is given by its upper shift
    /// `-m (1 + m sigma_i)^{-1}` (eigenbasis) and lower scalar.
    pub fn anisotropic_error(
        &self,
        z: Complex64,
        d: &[Complex64],
        upper_shift: &[Complex64],
        lower: Complex64,
        v: &Projection,
        w: &Projection,
    ) -> Complex64 {
        let upper: Complex64 = upper_shift
            .iter()
            .zip(v.vm_eig.iter().zip(&w.vm_eig))
            .map(|(s, (a, b))| s * (a * b))
            .sum();
        upper - lower * dot(&v.vn, &w.vn) + self.resolvent_part(z, d, &v.p_inv, &w.p_inv, v, w)
    }

    /// `m_N(z) = (1/N) tr R_N`.
    pub fn m_n(&self, z: Complex64) -> Complex64 {
        let r = self.rank();
        let s: Complex64 = self.kernel(z).iter().sum();
        (s + (self.n - r) as f64 * (-1.0 / z)) / self.n as f64
    }

    /// `(1/M) tr R_M`.
    pub fn mean_trace_rm(&self, z: Complex64) -> Complex64 {
        let r = self.rank();
        let s: Complex64 = self.kernel(z).iter().sum();
        (s + (self.m - r) as f64 * (-1.0 / z)) / self.m as f64
    }

    /// The lower-block column `(G_{w mu})_mu` for `w` supported on the lower block.
    pub fn lower_column(&self, z: Complex64, w: &Projection) -> Vec<Complex64> {
        let d = self.kernel(z);
        let mut out: Vec<Complex64> = if self.n > self.rank() {
            w.vn.iter().map(|&x| -x / z).collect()
        } else {
            vec![Complex64::new(0.0, 0.0); self.n]
        };
        for k in 0..self.rank() {
            let mut c = d[k] * w.q[k];
            if self.n > self.rank() {
                c += w.q[k] / z;
            }
            for (o, &zk) in out.iter_mut().zip(self.zeta.col(k).iter()) {
                *o += c * zk;
            }
        }
        out
    }

    /// Relative residual of `sum_mu |G_{w mu}|^2 = Im G_ww / eta` for `w` on the lower block.
    pub fn ward_residual(&self, z: Complex64, w_lower: &[f64]) -> f64 {
        let mut v = vec![0.0; self.m];
        v.extend_from_slice(w_lower);
        let p = self.project(&v);
        let col = self.lower_column(z, &p);
        let lhs: f64 = col.iter().map(|c| c.norm_sqr()).sum();
        let rhs = self.entry(z, &p, &p).im / z.im;
        (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
    }
}

/// `G(z)` by dense inversion of `[[-Sigma^{-1}, X], [X^T, -z]]`. For small test sizes only.
pub fn dense_resolvent(sigma: &PopulationCovariance, x: MatRef<'_, f64>, z: Complex64) -> Result<Mat<Complex64>> {
    if !sigma.is_positive() {
        return Err(Error::InvalidModel("dense resolvent needs an invertible Sigma".into()));
    }
    let (m, n) = (x.nrows(), x.ncols());
    let inv = PopulationCovariance { eigenvalues: sigma.eigenvalues.iter().map(|s| 1.0 / s).collect(), basis: sigma.basis.clone() }.dense();
    let h = Mat::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
        (true, true) => Complex64::new(-inv[(i, j)], 0.0),
        (true, false) => Complex64::new(x[(i, j - m)], 0.0),
        (false, true) => Complex64::new(x[(j, i - m)], 0.0),
        (false, false) => if i == j { -z } else { Complex64::new(0.0, 0.0) },
    });
    Ok(h.partial_piv_lu().inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{random_orthogonal, sample_x, EntryDistribution};

    fn setup(m: usize, n: usize) -> (PopulationCovariance, Mat<f64>) {
        let eig: Vec<f64> = (0..m).map(|i| 0.5 + 1.5 * i as f64 / m as f64).collect();
        let sigma = PopulationCovariance::diagonal(eig).with_basis(random_orthogonal(m, 3, 0).unwrap()).unwrap();
        let x = sample_x(&EntryDistribution::gaussian(), m, n, 5, 0).unwrap().matrix;
        (sigma, x)
    }

    fn unit(dim: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    }

    #[test]
    fn factorized_matches_dense() {
        for &(m, n) in &[(30, 30), (20, 35), (35, 20)] {
            let (sigma, x) = setup(m, n);
            let f = factorize(&sigma, x.as_ref()).unwrap();
            let z = Complex64::new(1.0, 0.5);
            let g = dense_resolvent(&sigma, x.as_ref(), z).unwrap();
            let scale = g.norm_max();
            let projections: Vec<Projection> = (0..m + n).map(|i| f.project(&unit(m + n, i))).collect();
            for i in 0..m + n {
                for j in 0..m + n {
                    let e = f.entry(z, &projections[i], &projections[j]);
                    assert!((e - g[(i, j)]).norm() < 1e-9 * scale, "({m},{n}) entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn ward_identity_holds() {
        let (sigma, x) = setup(50, 50);
        let f = factorize(&sigma, x.as_ref()).unwrap();
        let z = Complex64::new(1.0, 0.1);
        let w: Vec<f64> = (0..50).map(|i| ((i * 7 % 11) as f64 - 5.0) / 10.0).collect();
        let nw = crate::linalg::norm(&w);
        let w: Vec<f64> = w.iter().map(|x| x / nw).collect();
        assert!(f.ward_residual(z, &w) < 1e-10);
        assert!(f.ward_residual(z, &unit(50, 3)) < 1e-10);
        assert!(f.ward_residual(Complex64::new(1.0, 0.05), &w) < 1e-10);
    }

    #[test]
    fn empirical_stieltjes_transform() {
        let (sigma, x) = setup(20, 30);
        let f = factorize(&sigma, x.as_ref()).unwrap();
        let z = Complex64::new(0.3, 1e3);
        assert!((f.m_n(z) + 1.0 / z).norm() < 1e-5);
        let z = Complex64::new(0.8, 0.2);
        let phi = 20.0 / 30.0;
        let lhs = f.mean_trace_rm(z);
        let rhs = f.m_n(z) / phi - (phi - 1.0) / (phi * z);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
