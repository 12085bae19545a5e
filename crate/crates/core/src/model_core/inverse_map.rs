use num_complex::Complex64;

use super::population::PopulationModel;
use crate::error::{Error, Result};

const POLE_GUARD: f64 = 8.0 * f64::EPSILON;

/// The inverse map `f(x) = -1/x + sum_i r_i / (x + 1/s_i)` with `r_i = phi * weight_i`.
#[derive(Debug, Clone)]
pub struct InverseMap {
    pub phi: f64,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
}

/// `f` and its first two derivatives at a real point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FValue {
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
}

impl InverseMap {
    pub fn new(model: &PopulationModel) -> Self {
        Self {
            phi: model.phi,
            r: model.atoms.iter().map(|a| model.phi * a.weight).collect(),
            s: model.atoms.iter().map(|a| a.s).collect(),
        }
    }

    /// `sum_i r_i`, the fraction `rank(Sigma)/N`. Equals `phi` when `pi` has no mass at zero.
    pub fn total_r(&self) -> f64 {
        self.r.iter().sum()
    }

    /// The poles `-1/s_i`, increasing.
    pub fn poles(&self) -> Vec<f64> {
        self.s.iter().map(|s| -1.0 / s).collect()
    }

    fn check_pole(&self, x: f64) -> Result<()> {
        if x.abs() <= POLE_GUARD {
            return Err(Error::Pole { x, pole: 0.0, guard: POLE_GUARD });
        }
        for &s in &self.s {
            let p = -1.0 / s;
            let guard = POLE_GUARD * p.abs();
            if (x - p).abs() <= guard {
                return Err(Error::Pole { x, pole: p, guard });
            }
        }
        Ok(())
    }

    /// `f`, `f'` and `f''` at `x`. `x = +-inf` follows the convention `f(inf) = 0`.
    pub fn eval(&self, x: f64) -> Result<FValue> {
        if x.is_infinite() {
            return Ok(FValue { f: 0.0, f1: 0.0, f2: 0.0 });
        }
        self.check_pole(x)?;
        let inv = 1.0 / x;
        let (mut f, mut f1, mut f2) = (-inv, inv * inv, -2.0 * inv * inv * inv);
        for (&r, &s) in self.r.iter().zip(&self.s) {
            let d = 1.0 / (1.0 + x * s);
            let t = r * s * d;
            f += t;
            f1 -= t * s * d;
            f2 += 2.0 * t * s * d * s * d;
        }
        Ok(FValue { f, f1, f2 })
    }

    pub fn f(&self, m: Complex64) -> Complex64 {
        let mut acc = -1.0 / m;
        for (&r, &s) in self.r.iter().zip(&self.s) {
            acc += r * s / (1.0 + m * s);
        }
        acc
    }

    pub fn df(&self, m: Complex64) -> Complex64 {
        let mut acc = 1.0 / (m * m);
        for (&r, &s) in self.r.iter().zip(&self.s) {
            let d = 1.0 + m * s;
            acc -= r * s * s / (d * d);
        }
        acc
    }

    pub fn d2f(&self, m: Complex64) -> Complex64 {
        let mut acc = -2.0 / (m * m * m);
        for (&r, &s) in self.r.iter().zip(&self.s) {
            let d = 1.0 + m * s;
            acc += 2.0 * r * s * s * s / (d * d * d);
        }
        acc
    }

    /// `f(1/u)`, which is regular at `u = 0`.
    pub fn g(&self, u: f64) -> f64 {
        let mut acc = -u;
        for (&r, &s) in self.r.iter().zip(&self.s) {
            acc += r * s * u / (s + u);
        }
        acc
    }

    /// `d/du f(1/u)`, strictly decreasing on `(-s_min, inf)`.
    pub fn dg(&self, u: f64) -> f64 {
        let mut acc = -1.0;
        for (&r, &s) in self.r.iter().zip(&self.s) {
            let d = s + u;
            acc += r * s * s / (d * d);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(phi: f64) -> InverseMap {
        InverseMap::new(&PopulationModel::identity(phi, None).unwrap())
    }

    #[test]
    fn closed_form_values() {
        let map = mp(0.25);
        let v = map.eval(-2.0).unwrap();
        assert!((v.f - 0.25).abs() < 1e-15);
        assert!(v.f1.abs() < 1e-15);
        assert!((v.f2 + 0.25).abs() < 1e-15);
        let v = map.eval(-2.0 / 3.0).unwrap();
        assert!((v.f - 2.25).abs() < 1e-14);
        assert!(v.f1.abs() < 1e-13);
        assert!((v.f2 - 20.25).abs() < 1e-12);
    }

    #[test]
    fn infinity_convention_and_poles() {
        let map = mp(1.0);
        assert_eq!(map.eval(f64::INFINITY).unwrap().f, 0.0);
        assert!((map.g(0.0)).abs() < 1e-300);
        assert!(matches!(map.eval(-1.0), Err(Error::Pole { .. })));
        assert!(matches!(map.eval(0.0), Err(Error::Pole { .. })));
    }

    #[test]
    fn complex_derivatives_match_differences() {
        let map = mp(0.4);
        let m = Complex64::new(-0.3, 0.7);
        let h = 1e-6;
        let fd = (map.f(m + h) - map.f(m - h)) / (2.0 * h);
        assert!((fd - map.df(m)).norm() < 1e-8);
        let fd2 = (map.df(m + h) - map.df(m - h)) / (2.0 * h);
        assert!((fd2 - map.d2f(m)).norm() < 1e-7);
    }

    #[test]
    fn u_form_agrees_with_x_form() {
        let map = mp(2.0);
        for &x in &[-5.0, 0.7, 3.0] {
            let v = map.eval(x).unwrap();
            assert!((map.g(1.0 / x) - v.f).abs() < 1e-14);
            // d/du f(1/u) = -x^2 f'(x)
            assert!((map.dg(1.0 / x) + x * x * v.f1).abs() < 1e-12);
        }
    }
}
