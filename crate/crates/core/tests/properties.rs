use covlaws::equivalents::{make_domain, DomainKind};
use covlaws::model_core::regularity::stability_at;
use covlaws::model_core::{solve_m, Atom, DensityProfile, Dims, InverseMap, PopulationModel, SolverSettings, Thresholds};
use covlaws::sampler::k_coefficients;
use covlaws::statistics::{ks_distance, percentile};
use covlaws::Complex64;
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = PopulationModel> {
    (0.1f64..3.0, prop::collection::vec((0.2f64..6.0, 0.1f64..1.0), 1..4)).prop_map(|(phi, raw)| {
        let total: f64 = raw.iter().map(|r| r.1).sum();
        let atoms = raw.iter().map(|&(s, w)| Atom { s, weight: w / total }).collect();
        PopulationModel::new(phi, atoms, None).unwrap()
    })
}

fn settings() -> SolverSettings {
    SolverSettings::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eta_im_m_grows_with_eta(model in model_strategy(), t in 0.0f64..1.2) {
        let top = DensityProfile::new(&model).unwrap().edges[0];
        let e = 0.05 + t * top;
        let mut last = 0.0;
        for k in 0..8 {
            let eta = 1e-3 * 4f64.powi(k);
            let v = eta * solve_m(Complex64::new(e, eta), &model, &settings()).unwrap().m.im;
            prop_assert!(v >= last * (1.0 - 1e-9), "eta Im m fell from {last} to {v} at eta {eta}");
            last = v;
        }
    }

    #[test]
    fn solver_residual_is_small(model in model_strategy(), e in 0.01f64..20.0, eta in 1e-4f64..5.0) {
        let v = solve_m(Complex64::new(e, eta), &model, &settings()).unwrap();
        prop_assert!(v.m.im > 0.0);
        prop_assert!(v.residual < 1e-9 * (1.0 + e), "residual {}", v.residual);
    }

    #[test]
    fn identity_edges_are_marchenko_pastur(phi in prop_oneof![0.05f64..0.9, 1.1f64..4.0]) {
        let p = DensityProfile::new(&PopulationModel::identity(phi, None).unwrap()).unwrap();
        prop_assert_eq!(p.edges.len(), 2);
        prop_assert!((p.edges[0] - (1.0 + phi.sqrt()).powi(2)).abs() < 1e-9);
        prop_assert!((p.edges[1] - (1.0 - phi.sqrt()).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn stability_identity(model in model_strategy(), e in 0.1f64..10.0, eta in 0.01f64..2.0, du in (-0.3f64..0.3, 0.0f64..0.3)) {
        let z = Complex64::new(e, eta);
        let m = solve_m(z, &model, &settings()).unwrap().m;
        let u = m + Complex64::new(du.0, du.1) * m.norm();
        let map = InverseMap::new(&model);
        prop_assume!(map.s.iter().all(|&s| (1.0 + u * s).norm() > 1e-3));
        let (alpha, beta) = stability_at(&map, m, u);
        let lhs = alpha * (u - m) * (u - m) + beta * (u - m);
        let rhs = u * m * (map.f(u) - z);
        prop_assert!((lhs - rhs).norm() < 1e-8 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
    }

    #[test]
    fn domains_are_closed_upward(model in model_strategy(), t in 0.0f64..1.0, s in 0.0f64..1.0, lift in 0.0f64..5.0) {
        let profile = DensityProfile::new(&model).unwrap();
        let th = Thresholds::default();
        let n = 500;
        let kinds = [DomainKind::Full, DomainKind::Edge(1), DomainKind::Bulk(1), DomainKind::Outside];
        for kind in kinds {
            let Ok(d) = make_domain(kind, th, n, Some(&profile)) else { continue };
            let e = -1.0 / th.tau + t * 2.0 / th.tau;
            let eta = d.eta_min + s * (d.eta_max - d.eta_min);
            let z = Complex64::new(e, eta);
            let up = Complex64::new(e, (eta + lift).min(d.eta_max));
            if d.contains(z) {
                prop_assert!(d.contains(up), "{kind:?}: {z} inside but {up} outside");
            }
        }
    }

    #[test]
    fn k_coefficients_vanish_below_first_mismatch(
        base in prop::collection::vec(-2.0f64..2.0, 8),
        bump in prop::collection::vec(-1.0f64..1.0, 8),
        n in 1usize..8,
        theta in 0.0f64..1.0,
    ) {
        let mut other = base.clone();
        for k in n..8 {
            other[k] += bump[k];
        }
        let k = k_coefficients(&base, &other, theta, 8).unwrap();
        for v in &k[..n] {
            prop_assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_sigma_scales_edges(
        raw in prop::collection::vec((0.2f64..6.0, 1usize..80), 1..4),
        n in 40usize..400,
        c in 0.2f64..5.0,
    ) {
        let m: usize = raw.iter().map(|r| r.1).sum();
        let atoms = raw.iter().map(|&(s, k)| Atom { s, weight: k as f64 / m as f64 }).collect();
        let model = PopulationModel::new(m as f64 / n as f64, atoms, Some(Dims { m, m_hat: m, n })).unwrap();
        let a = DensityProfile::new(&model).unwrap();
        let b = DensityProfile::new(&model.scaled(c).unwrap()).unwrap();
        prop_assert_eq!(a.edges.len(), b.edges.len());
        for (x, y) in a.edges.iter().zip(&b.edges) {
            prop_assert!((c * x - y).abs() < 1e-8 * (1.0 + y.abs()), "{x} * {c} vs {y}");
        }
        prop_assert_eq!(a.counts.unwrap().counting, b.counts.unwrap().counting);
    }

    #[test]
    fn ks_is_a_symmetric_distance(
        a in prop::collection::vec(-3.0f64..3.0, 1..40),
        b in prop::collection::vec(-3.0f64..3.0, 1..40),
    ) {
        let d = ks_distance(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(d, ks_distance(&b, &a).unwrap());
        prop_assert_eq!(ks_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn percentile_is_monotone(v in prop::collection::vec(-5.0f64..5.0, 1..60), q1 in 0.0f64..1.0, q2 in 0.0f64..1.0) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(percentile(&v, lo) <= percentile(&v, hi));
    }
}
