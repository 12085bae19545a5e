//! Continuation solver for self-consistent equations `G(m, z) = 0` with `m` in the upper half plane.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::inverse_map::InverseMap;
use super::population::PopulationModel;
use crate::error::{Error, Result};
use crate::quadrature::neville_at_zero;

/// A self-consistent equation whose solution is a Stieltjes transform.
pub trait SelfConsistent {
    fn residual(&self, m: Complex64, z: Complex64) -> Complex64;
    fn d_m(&self, m: Complex64, z: Complex64) -> Complex64;
    fn d_z(&self, m: Complex64, z: Complex64) -> Complex64;
    /// A map whose fixed point solves the equation; contracting for large `Im z`.
    fn fixed_point(&self, m: Complex64, z: Complex64) -> Complex64;
    /// Normalization of the residual tolerance.
    fn scale(&self, z: Complex64) -> f64 {
        z.norm().max(1.0)
    }
}

/// `f(m) - z = 0`.
impl SelfConsistent for InverseMap {
    fn residual(&self, m: Complex64, z: Complex64) -> Complex64 {
        self.f(m) - z
    }
    fn d_m(&self, m: Complex64, _z: Complex64) -> Complex64 {
        self.df(m)
    }
    fn d_z(&self, _m: Complex64, _z: Complex64) -> Complex64 {
        Complex64::new(-1.0, 0.0)
    }
    fn fixed_point(&self, m: Complex64, z: Complex64) -> Complex64 {
        let mut acc = -z;
        for (&r, &s) in self.r.iter().zip(&self.s) {
            acc += r * s / (1.0 + m * s);
        }
        1.0 / acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// Relative residual tolerance, scaled by `max(1, |z|)`.
    pub tol: f64,
    pub max_newton: usize,
    pub max_fixed_point: usize,
    /// Imaginary parts used for boundary values, relative to `min(1, |E|)`.
    pub boundary_etas: [f64; 4],
    /// Largest accepted change of the real-axis polish step.
    pub polish_jump: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_newton: 60,
            max_fixed_point: 100_000,
            boundary_etas: [1e-6, 1e-7, 1e-8, 1e-9],
            polish_jump: 1e-4,
        }
    }
}

/// `m(z)` together with the residual of the defining equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StieltjesValue {
    pub z: Complex64,
    pub m: Complex64,
    pub residual: f64,
}

struct Newton {
    m: Complex64,
    residual: f64,
    converged: bool,
    iterations: usize,
}

fn newton<E: SelfConsistent + ?Sized>(eq: &E, mut m: Complex64, z: Complex64, tol: f64, max_iter: usize) -> Newton {
    let target = tol * eq.scale(z);
    let mut res = eq.residual(m, z).norm();
    for it in 0..max_iter {
        if res <= target {
            return Newton { m, residual: res, converged: true, iterations: it };
        }
        let g = eq.residual(m, z);
        let dm = g / eq.d_m(m, z);
        if !dm.is_finite() {
            break;
        }
        m -= dm;
        res = eq.residual(m, z).norm();
        // Stagnation at rounding level counts as convergence if the residual is close.
        if dm.norm() <= 4.0 * f64::EPSILON * m.norm() && res <= 1e3 * target {
            return Newton { m, residual: res, converged: true, iterations: it + 1 };
        }
    }
    let converged = res <= target;
    Newton { m, residual: res, converged, iterations: max_iter }
}

fn fixed_point_then_newton<E: SelfConsistent + ?Sized>(
    eq: &E,
    init: Complex64,
    z: Complex64,
    settings: &SolverSettings,
) -> Result<(Complex64, f64)> {
    let mut m = init;
    let mut omega = 0.5;
    let mut prev = f64::INFINITY;
    for _ in 0..settings.max_fixed_point {
        let next = eq.fixed_point(m, z);
        let step = next - m;
        m += omega * step;
        let d = step.norm();
        if d > prev {
            omega = (omega * 0.7).max(0.01);
        }
        prev = d;
        if d <= 1e-6 * m.norm().max(1e-12) {
            break;
        }
    }
    let nt = newton(eq, m, z, settings.tol, settings.max_newton);
    if nt.converged && nt.m.im > 0.0 {
        Ok((nt.m, nt.residual))
    } else {
        Err(Error::NoConvergence { z, last: nt.m, residual: nt.residual })
    }
}

/// Solves at `E + i eta` for each `eta` in `etas` (decreasing), by continuation from `eta = 1`.
pub fn solve_path<E: SelfConsistent + ?Sized>(
    eq: &E,
    e: f64,
    etas: &[f64],
    settings: &SolverSettings,
) -> Result<Vec<StieltjesValue>> {
    let start = etas.first().copied().unwrap_or(1.0).max(1.0);
    let mut z = Complex64::new(e, start);
    let (mut m, mut res) = match newton(eq, -1.0 / z, z, settings.tol, settings.max_newton) {
        nt if nt.converged && nt.m.im > 0.0 && start >= 10.0 => (nt.m, nt.residual),
        _ => fixed_point_then_newton(eq, -1.0 / z, z, settings)?,
    };
    let mut out = Vec::with_capacity(etas.len());
    let mut ratio: f64 = 0.5;
    for &target in etas {
        while z.im > target {
            let next = Complex64::new(e, (z.im * ratio).max(target));
            let slope = -eq.d_z(m, z) / eq.d_m(m, z);
            let pred = m + slope * (next - z);
            let nt = newton(eq, pred, next, settings.tol, 12);
            if nt.converged && nt.m.im > 0.0 && nt.m.is_finite() {
                z = next;
                m = nt.m;
                res = nt.residual;
                if nt.iterations <= 4 {
                    ratio = (ratio * ratio).max(1e-3);
                }
            } else if ratio < 0.99 {
                ratio = ratio.sqrt();
            } else {
                let (m2, r2) = fixed_point_then_newton(eq, m, next, settings)?;
                z = next;
                m = m2;
                res = r2;
            }
        }
        out.push(StieltjesValue { z, m, residual: res });
    }
    Ok(out)
}

/// `m(z)` for `Im z > 0`.
pub fn solve_upper<E: SelfConsistent + ?Sized>(eq: &E, z: Complex64, settings: &SolverSettings) -> Result<StieltjesValue> {
    let mut v = solve_path(eq, z.re, &[z.im], settings)?;
    Ok(v.pop().expect("one target"))
}

/// The boundary value `m(E + i0)`.
///
/// Values at four small `eta` are extrapolated in `sqrt(eta)`, which is analytic both in the
/// bulk and at square-root edges, and then polished on the real axis.
pub fn solve_boundary<E: SelfConsistent + ?Sized>(eq: &E, e: f64, settings: &SolverSettings) -> Result<StieltjesValue> {
    let scale = e.abs().min(1.0).max(1e-6);
    let etas: Vec<f64> = settings.boundary_etas.iter().map(|h| h * scale).collect();
    let path = solve_path(eq, e, &etas, settings)?;
    let ts: Vec<f64> = etas.iter().map(|h| h.sqrt()).collect();
    let ms: Vec<Complex64> = path.iter().map(|v| v.m).collect();
    let extrapolated = neville_at_zero(&ts, &ms);
    let z = Complex64::new(e, 0.0);
    let nt = newton(eq, extrapolated, z, settings.tol, settings.max_newton);
    let jump = (nt.m - extrapolated).norm();
    let accept = nt.converged
        && nt.m.is_finite()
        && jump <= settings.polish_jump * nt.m.norm().max(1.0)
        && nt.m.im >= -1e-12 * nt.m.norm().max(1.0);
    let m = if accept {
        nt.m
    } else {
        path.last().expect("four etas").m
    };
    let m = Complex64::new(m.re, m.im.max(0.0));
    Ok(StieltjesValue { z, m, residual: eq.residual(m, z).norm() })
}

/// `m(z)` for the covariance model. `Im z = 0` selects the boundary value.
pub fn solve_m(z: Complex64, model: &PopulationModel, settings: &SolverSettings) -> Result<StieltjesValue> {
    let map = InverseMap::new(model);
    solve_with(&map, z, settings)
}

pub fn solve_with<E: SelfConsistent + ?Sized>(eq: &E, z: Complex64, settings: &SolverSettings) -> Result<StieltjesValue> {
    if z.im > 0.0 {
        solve_upper(eq, z, settings)
    } else if z.im == 0.0 {
        solve_boundary(eq, z.re, settings)
    } else {
        Err(Error::InvalidModel(format!("Im z must be nonnegative, got {z}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(phi: f64) -> PopulationModel {
        PopulationModel::identity(phi, None).unwrap()
    }

    // Root with positive imaginary part of z m^2 + (z + 1 - phi) m + 1 = 0.
    fn mp_closed_form(phi: f64, z: Complex64) -> Complex64 {
        let b = z + 1.0 - phi;
        let disc = (b * b - 4.0 * z).sqrt();
        let r1 = (-b + disc) / (2.0 * z);
        let r2 = (-b - disc) / (2.0 * z);
        if r1.im > r2.im { r1 } else { r2 }
    }

    #[test]
    fn large_z_asymptotics() {
        let v = solve_m(Complex64::new(0.0, 100.0), &mp(0.25), &SolverSettings::default()).unwrap();
        assert!((v.m - Complex64::new(0.0, 0.01)).norm() < 1e-3);
    }

    #[test]
    fn boundary_value_in_bulk() {
        let v = solve_m(Complex64::new(1.0, 0.0), &mp(0.25), &SolverSettings::default()).unwrap();
        let exact = Complex64::new(-0.875, 0.9375f64.sqrt() / 2.0);
        assert!((v.m - exact).norm() < 1e-10, "{}", v.m);
        assert!((exact.im - 0.484123).abs() < 1e-6);
    }

    #[test]
    fn upper_half_plane_matches_closed_form() {
        let settings = SolverSettings::default();
        for &phi in &[0.25, 1.0, 4.0] {
            for &(e, eta) in &[(1.0, 0.01), (0.1, 1e-5), (3.0, 0.3), (-1.0, 1e-3), (9.0, 1e-7)] {
                let z = Complex64::new(e, eta);
                let v = solve_m(z, &mp(phi), &settings).unwrap();
                let exact = mp_closed_form(phi, z);
                assert!((v.m - exact).norm() < 1e-9 * exact.norm().max(1.0), "phi={phi} z={z}: {} vs {exact}", v.m);
                assert!(v.residual <= 1e-11 * z.norm().max(1.0));
            }
        }
    }

    #[test]
    fn gap_values_are_real_and_increasing() {
        let model = mp(0.25);
        let settings = SolverSettings::default();
        let mut prev = f64::NEG_INFINITY;
        for &e in &[0.05, 0.1, 0.2, 2.5, 3.0, 4.0] {
            let v = solve_m(Complex64::new(e, 0.0), &model, &settings).unwrap();
            assert!(v.m.im.abs() < 1e-9, "E={e}: {}", v.m);
            if e > 2.25 {
                assert!(v.m.re > prev);
                prev = v.m.re;
            }
        }
    }

    #[test]
    fn path_agrees_with_fresh_solves() {
        let model = mp(0.5);
        let map = InverseMap::new(&model);
        let settings = SolverSettings::default();
        let etas = [0.5, 0.1, 0.01, 1e-4];
        let path = solve_path(&map, 1.3, &etas, &settings).unwrap();
        for (v, &eta) in path.iter().zip(&etas) {
            let fresh = solve_m(Complex64::new(1.3, eta), &model, &settings).unwrap();
            assert!((v.m - fresh.m).norm() < 1e-10);
        }
    }
}
