//! Critical points of the inverse map and the resulting spectral edges.

use serde::{Deserialize, Serialize};

use super::inverse_map::InverseMap;
use super::population::PopulationModel;
use crate::error::Result;

/// A critical point `x_k` of `f` and its critical value `a_k = f(x_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    /// May be `+inf` (the convention for `sum_i r_i = 1`).
    pub x: f64,
    pub a: f64,
    /// Index `i` of the interval `I_i` containing `x`; `0` for the unbounded one.
    pub interval: usize,
    /// Part of a double root of `f'`.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    /// Ordered so that `a_1 >= a_2 >= ... >= a_2p`.
    pub points: Vec<CriticalPoint>,
}

impl CriticalSet {
    /// Number of connected components of the support.
    pub fn p(&self) -> usize {
        self.points.len() / 2
    }

    pub fn edges(&self) -> Vec<f64> {
        self.points.iter().map(|c| c.a).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|c| c.x).collect()
    }

    pub fn has_degenerate(&self) -> bool {
        self.points.iter().any(|c| c.degenerate)
    }
}

const BISECTION_STEPS: usize = 200;

// Root of `h` on (lo, hi) given the signs at the two ends; the ends themselves are never evaluated.
fn bisect(mut lo: f64, mut hi: f64, lo_negative: bool, h: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = h(mid);
        if v == 0.0 {
            return mid;
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Locates all critical points of `f` and orders them by decreasing critical value.
pub fn locate_critical_points(model: &PopulationModel) -> Result<CriticalSet> {
    let map = InverseMap::new(model);
    let poles = map.poles();
    let n = poles.len();

    // x^2 f'(x) = 1 - sum_i r_i s_i^2 x^2 / (1 + x s_i)^2
    let x2f1 = |x: f64| {
        let mut acc = 1.0;
        for (&r, &s) in map.r.iter().zip(&map.s) {
            let q = x * s / (1.0 + x * s);
            acc -= r * q * q;
        }
        acc
    };
    // x^3 f''(x) / 2 = -1 + sum_i r_i (x s_i / (1 + x s_i))^3
    let x3f2 = |x: f64| {
        let mut acc = -1.0;
        for (&r, &s) in map.r.iter().zip(&map.s) {
            let q = x * s / (1.0 + x * s);
            acc += r * q * q * q;
        }
        acc
    };

    let mut inner: Vec<CriticalPoint> = Vec::new();

    // I_1 = (-1/s_1, 0): x^2 f' increases from -inf to 1.
    let x = bisect(poles[0], 0.0, true, x2f1);
    inner.push(CriticalPoint { x, a: map.eval(x)?.f, interval: 1, degenerate: false });

    // I_i = (-1/s_i, -1/s_{i-1}): f' is unimodal with its maximum at the root of f''.
    for i in 1..n {
        let (lo, hi) = (poles[i], poles[i - 1]);
        // x^3 f'' goes from -inf to +inf on I_i.
        let xs = bisect(lo, hi, true, x3f2);
        let peak = x2f1(xs);
        let resolution = 1e-12;
        if peak.abs() <= resolution {
            let a = map.eval(xs)?.f;
            for _ in 0..2 {
                inner.push(CriticalPoint { x: xs, a, interval: i + 1, degenerate: true });
            }
        } else if peak > 0.0 {
            // x^2 f' is negative near both poles and positive at xs.
            let right = bisect(xs, hi, false, x2f1);
            let left = bisect(lo, xs, true, x2f1);
            for x in [right, left] {
                inner.push(CriticalPoint { x, a: map.eval(x)?.f, interval: i + 1, degenerate: false });
            }
        }
    }
    inner.sort_by(|a, b| b.x.total_cmp(&a.x));

    // I_0 in the variable u = 1/x, where d/du f(1/u) decreases strictly on (-s_n, inf).
    let s_min = map.s[n - 1];
    let mut hi = 1.0f64;
    while map.dg(hi) >= 0.0 {
        hi *= 2.0;
    }
    let u = if map.dg(0.0) == 0.0 {
        0.0
    } else {
        bisect(-s_min, hi, false, |u| map.dg(u))
    };
    let total = map.total_r();
    let (x0, a0) = if u.abs() <= 1e-14 || (total - 1.0).abs() <= 1e-14 {
        (f64::INFINITY, 0.0)
    } else {
        (1.0 / u, map.g(u))
    };
    inner.push(CriticalPoint { x: x0, a: a0, interval: 0, degenerate: false });

    Ok(CriticalSet { points: inner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_core::population::Atom;

    #[test]
    fn marchenko_pastur_quarter() {
        let set = locate_critical_points(&PopulationModel::identity(0.25, None).unwrap()).unwrap();
        assert_eq!(set.p(), 1);
        let xs = set.xs();
        let edges = set.edges();
        assert!((xs[0] + 2.0 / 3.0).abs() < 1e-12);
        assert!((xs[1] + 2.0).abs() < 1e-12);
        assert!((edges[0] - 2.25).abs() < 1e-12);
        assert!((edges[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn marchenko_pastur_wide_and_square() {
        let set = locate_critical_points(&PopulationModel::identity(4.0, None).unwrap()).unwrap();
        assert!((set.xs()[0] + 1.0 / 3.0).abs() < 1e-12);
        assert!((set.xs()[1] - 1.0).abs() < 1e-12);
        assert!((set.edges()[0] - 9.0).abs() < 1e-11);
        assert!((set.edges()[1] - 1.0).abs() < 1e-11);

        let set = locate_critical_points(&PopulationModel::identity(1.0, None).unwrap()).unwrap();
        assert!((set.xs()[0] + 0.5).abs() < 1e-12);
        assert!(set.xs()[1].is_infinite());
        assert_eq!(set.edges()[1], 0.0);
    }

    #[test]
    fn component_counts_of_example_models() {
        let atoms = |scale: f64| {
            vec![
                Atom { s: 10.0, weight: 0.1 * scale },
                Atom { s: 5.0, weight: 0.1 * scale },
                Atom { s: 1.5, weight: 0.5 * scale },
                Atom { s: 1.0, weight: 0.3 * scale },
            ]
        };
        let three = PopulationModel::new(0.1, atoms(1.0), None).unwrap();
        let set = locate_critical_points(&three).unwrap();
        assert_eq!(set.p(), 3);
        let one = PopulationModel::new(10.0, atoms(1.0), None).unwrap();
        assert_eq!(locate_critical_points(&one).unwrap().p(), 1);
    }
}
