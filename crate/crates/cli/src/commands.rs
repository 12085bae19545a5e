use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use covlaws::covariance::PopulationCovariance;
use covlaws::equivalents::{
    build_equivalents, bulk_edge_grid, covariance::from_m, log_spaced, wigner_edge_points, wigner_equivalents, wigner_from_m,
    wigner_grid, wigner_m, EquivalentSet, WignerEquivalents,
};
use covlaws::model_core::{check_regularity, classical_locations, edge_curvature, DensityProfile, SolverSettings};
use covlaws::resolvent_lab::{anisotropic_scan, factorize, wigner_scan, ErrorScan, VectorPanel, WignerFactorization};
use covlaws::sampler::{k_coefficients, random_orthogonal, sample_deformed_wigner, sample_x, Symmetry};
use covlaws::statistics::{
    component_eigenvalues, draw_covariance_eigenvalues, edge_rescaled_samples, ks_distance, percentile,
    reference_edge_samples, rigidity_profile, support_gap_check, wigner_edge_samples, EdgeSampleSet, RigidityProfile,
};
use covlaws::Complex64;
use faer::Mat;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Artifacts, Check};
use crate::plot::{Figure, Series, Style};

/// Debug overrides that are not part of the reproducible configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Debug {
    /// Shift added to `m` before the equivalents are formed.
    pub corrupt_m: Option<f64>,
}

fn real_entries(cfg: &RunConfig) -> Result<()> {
    if cfg.distribution.symmetry == Symmetry::Complex {
        bail!("at `distribution.symmetry`: sampling commands support real entries only");
    }
    Ok(())
}

fn eta_ladder(cfg: &RunConfig, n: usize) -> Vec<f64> {
    log_spaced((n as f64).powf(cfg.grid.eta_exponent), 1.0 / cfg.regularity.tau, cfg.grid.n_eta)
}

pub fn density(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    let model = cfg.model()?;
    let profile = DensityProfile::new(model)?;
    let hi = 1.1 * profile.edges[0];
    let grid = profile.density_grid(0.0, hi, cfg.grid.density_points)?;
    let mut csv = String::from("E,rho\n");
    for (e, rho) in &grid {
        let _ = writeln!(csv, "{e},{rho:e}");
    }
    out.write("density.csv", csv)?;
    let gamma = match model.dims {
        Some(d) => Some(classical_locations(&profile, d.n)?.flat()),
        None => None,
    };
    out.write_json(
        "edges.json",
        &json!({
            "edges": profile.edges,
            "components": profile.components,
            "counts": profile.counts,
            "atom_mass_at_zero": profile.atom_mass_at_zero,
            "gamma": gamma,
        }),
    )?;
    let fig = Figure {
        title: "asymptotic density",
        x_label: "E",
        y_label: "rho(E)",
        series: vec![Series { label: "rho", points: grid, style: Style::Line }],
    };
    out.write("density.svg", fig.to_svg())?;
    println!("p = {} components", profile.p());
    for (k, (lo, hi)) in profile.components.iter().enumerate() {
        println!("component {}: [{lo:.12}, {hi:.12}]", k + 1);
    }
    Ok(Vec::new())
}

pub fn edges(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    let profile = DensityProfile::new(cfg.model()?)?;
    let mut rows = Vec::new();
    for (k, cp) in profile.critical.points.iter().enumerate() {
        let varpi = edge_curvature(&profile, k + 1).ok();
        println!("a_{} = {:.12}", k + 1, cp.a);
        rows.push(json!({ "k": k + 1, "a": cp.a, "x": cp.x, "varpi": varpi, "degenerate": cp.degenerate }));
    }
    let regularity = check_regularity(&profile, cfg.regularity)?;
    out.write_json("edges.json", &json!({ "edges": rows, "counts": profile.counts, "regularity": regularity }))?;
    Ok(Vec::new())
}

pub fn gamma(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    let model = cfg.sized_model()?;
    let profile = DensityProfile::new(model)?;
    let gamma = classical_locations(&profile, model.dims()?.n)?;
    let mut csv = String::from("k,i,gamma\n");
    for (k, block) in gamma.per_component.iter().enumerate() {
        for (i, g) in block.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{g}", k + 1, i + 1);
        }
    }
    out.write("gamma.csv", csv)?;
    let sizes: Vec<usize> = gamma.per_component.iter().map(Vec::len).collect();
    println!("classical locations per component: {sizes:?}");
    Ok(Vec::new())
}

fn error_figure(scan: &ErrorScan, title: &str) -> String {
    let mut psi: Vec<(f64, f64)> = scan.records.iter().map(|r| (r.z_im.log10(), r.psi.log10())).collect();
    psi.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    psi.dedup();
    let aniso = scan.records.iter().map(|r| (r.z_im.log10(), r.max_aniso.log10())).collect();
    let avg = scan.records.iter().map(|r| (r.z_im.log10(), r.avg_err.log10())).collect();
    Figure {
        title,
        x_label: "log10 eta",
        y_label: "log10 error",
        series: vec![
            Series { label: "Psi", points: psi, style: Style::Line },
            Series { label: "anisotropic", points: aniso, style: Style::Points },
            Series { label: "averaged", points: avg, style: Style::Points },
        ],
    }
    .to_svg()
}

fn scan_checks(cfg: &RunConfig, scan: &ErrorScan) -> Vec<Check> {
    vec![
        Check::at_most("aniso_ratio", scan.max_aniso_ratio(), cfg.thresholds.aniso_ratio_max),
        Check::at_most("avg_ratio", scan.max_avg_ratio(), cfg.thresholds.avg_ratio_max),
    ]
}

fn emit_scan(scan: &ErrorScan, title: &str, cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    out.write("error_scan.csv", scan.to_csv())?;
    out.write("error_scan.svg", error_figure(scan, title))?;
    println!(
        "{} records: max anisotropic ratio {:.3}, max averaged ratio {:.3}",
        scan.records.len(),
        scan.max_aniso_ratio(),
        scan.max_avg_ratio()
    );
    Ok(scan_checks(cfg, scan))
}

pub fn verify_local_law(cfg: &RunConfig, debug: Debug, out: &mut Artifacts) -> Result<Vec<Check>> {
    real_entries(cfg)?;
    let model = cfg.sized_model()?;
    let n = model.dims()?.n;
    let profile = DensityProfile::new(model)?;
    let sigma = PopulationCovariance::from_model(model)?;
    let grid = bulk_edge_grid(&profile, cfg.regularity, n, cfg.grid.n_points, &eta_ladder(cfg, n))?;
    let s = SolverSettings::default();
    let equivalents = grid
        .iter()
        .map(|&z| {
            let e = build_equivalents(z, model, &sigma, &s).with_context(|| format!("equivalents at z = {z}"))?;
            match debug.corrupt_m {
                Some(shift) => Ok(from_m(z, e.m + shift, &sigma, n)?),
                None => Ok(e),
            }
        })
        .collect::<Result<Vec<EquivalentSet>>>()?;
    let panel = VectorPanel::new(sigma.dim(), n, cfg.panel.n_vectors, &sigma, cfg.seed, 0);
    let mut scan = ErrorScan::default();
    for trial in 0..cfg.trials as u64 {
        let x = sample_x(&cfg.distribution, sigma.dim(), n, cfg.seed, trial)?;
        let fact = factorize(&sigma, x.matrix.as_ref())?;
        scan.records.extend(anisotropic_scan(&fact, &equivalents, &panel, cfg.seed).records);
    }
    emit_scan(&scan, "local law errors", cfg, out)
}

fn trial_csv(header: &str, rows: impl IntoIterator<Item = (u64, String)>) -> String {
    let mut csv = format!("trial,{header}\n");
    for (trial, body) in rows {
        for line in body.lines().skip(1) {
            let _ = writeln!(csv, "{trial},{line}");
        }
    }
    csv
}

pub fn rigidity(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    real_entries(cfg)?;
    let model = cfg.sized_model()?;
    let n = model.dims()?.n;
    let profile = DensityProfile::new(model)?;
    let sigma = PopulationCovariance::from_model(model)?;
    let gamma = classical_locations(&profile, n)?;
    let mut ratios = Vec::new();
    let mut rows = Vec::new();
    let mut warnings = 0;
    for trial in 0..cfg.trials as u64 {
        let ev = draw_covariance_eigenvalues(&sigma, n, &cfg.distribution, cfg.seed, trial)?;
        let labeled = component_eigenvalues(&ev, &profile);
        warnings += labeled.warnings.len();
        let prof = rigidity_profile(&labeled, &gamma, n, cfg.regularity.tau);
        ratios.extend(prof.ratios());
        rows.push((trial, prof.to_csv()));
    }
    out.write("rigidity.csv", trial_csv(RigidityProfile::HEADER, rows))?;
    if ratios.is_empty() {
        bail!("no classical locations above tau = {}", cfg.regularity.tau);
    }
    let q = percentile(&ratios, cfg.rigidity.percentile);
    println!(
        "{} ratios, {:.2}th percentile {q:.3}, max {:.3}, labeling warnings {warnings}",
        ratios.len(),
        100.0 * cfg.rigidity.percentile,
        ratios.iter().copied().fold(0.0, f64::max)
    );
    Ok(vec![Check::at_most("rigidity_percentile_ratio", q, cfg.thresholds.rigidity_ratio_max)])
}

pub fn gap_check(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    real_entries(cfg)?;
    let model = cfg.sized_model()?;
    let n = model.dims()?.n;
    let profile = DensityProfile::new(model)?;
    let sigma = PopulationCovariance::from_model(model)?;
    let mut csv = String::from("trial,lambda,distance\n");
    let mut total = 0;
    let mut distance = 0.0;
    for trial in 0..cfg.trials as u64 {
        let ev = draw_covariance_eigenvalues(&sigma, n, &cfg.distribution, cfg.seed, trial)?;
        let report = support_gap_check(&ev, &profile, n, cfg.rigidity.epsilon, cfg.regularity.tau);
        distance = report.distance;
        total += report.count();
        for v in &report.violations {
            let _ = writeln!(csv, "{trial},{v},{}", profile.distance_to_support(*v));
        }
    }
    out.write("gap_check.csv", csv)?;
    println!("{total} eigenvalues farther than {distance:.4e} from the support over {} trials", cfg.trials);
    Ok(vec![Check::at_most("gap_outliers", total as f64, cfg.thresholds.gap_outliers_max as f64)])
}

fn ecdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect()
}

fn compare_edges(
    cfg: &RunConfig,
    sample: &EdgeSampleSet,
    reference: &EdgeSampleSet,
    reference_name: &str,
    out: &mut Artifacts,
) -> Result<Vec<Check>> {
    let ks = (0..sample.depth)
        .map(|j| ks_distance(&sample.coordinate(j), &reference.coordinate(j)))
        .collect::<covlaws::Result<Vec<f64>>>()?;
    out.write("edge_samples.csv", sample.to_csv())?;
    out.write("reference_samples.csv", reference.to_csv())?;
    out.write_json(
        "edge_ks.json",
        &json!({
            "ks": ks,
            "location": sample.location,
            "varpi": sample.varpi,
            "means": (0..sample.depth).map(|j| [sample.mean(j), reference.mean(j)]).collect::<Vec<_>>(),
            "reference": reference_name,
        }),
    )?;
    let fig = Figure {
        title: "rescaled extreme eigenvalue",
        x_label: "q",
        y_label: "empirical CDF",
        series: vec![
            Series { label: "sample", points: ecdf(&sample.coordinate(0)), style: Style::Line },
            Series { label: reference_name, points: ecdf(&reference.coordinate(0)), style: Style::Line },
        ],
    };
    out.write("edge_ecdf.svg", fig.to_svg())?;
    for (j, d) in ks.iter().enumerate() {
        println!("coordinate {}: KS {d:.4}, means {:.4} vs {:.4}", j + 1, sample.mean(j), reference.mean(j));
    }
    Ok(vec![Check::at_most("edge_ks", ks.iter().copied().fold(0.0, f64::max), cfg.thresholds.ks_max)])
}

pub fn edge_stats(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    real_entries(cfg)?;
    let model = cfg.sized_model()?;
    let n = model.dims()?.n;
    let profile = DensityProfile::new(model)?;
    let sigma = PopulationCovariance::from_model(model)?;
    let e = &cfg.edge;
    let sample = edge_rescaled_samples(&profile, &sigma, e.edge, e.depth, cfg.trials, &cfg.distribution, cfg.seed)?;
    let reference = reference_edge_samples(1, e.depth, n, cfg.trials, e.reference_seed.unwrap_or(cfg.seed + 1))?;
    compare_edges(cfg, &sample, &reference, "GOE", out)
}

struct Deformation {
    spectrum: Vec<f64>,
    matrix: Mat<f64>,
    basis: Option<Arc<Mat<f64>>>,
}

fn deformation(cfg: &RunConfig) -> Result<Deformation> {
    let spec = cfg.wigner()?;
    let d = spec.eigenvalues()?;
    let n = d.len();
    let diag = Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { 0.0 });
    Ok(match spec.rotation_seed {
        None => Deformation { spectrum: d, matrix: diag, basis: None },
        Some(seed) => {
            let o = random_orthogonal(n, seed, 0)?;
            let a = &o * &diag * o.transpose();
            let matrix = Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
            Deformation { spectrum: d, matrix, basis: Some(Arc::new(o)) }
        }
    })
}

pub fn wigner_density(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    let a = cfg.wigner()?.eigenvalues()?;
    let [lower, upper] = wigner_edge_points(&a);
    let pad = 0.1 * (upper.l - lower.l);
    let (lo, hi) = (lower.l - pad, upper.l + pad);
    let s = SolverSettings::default();
    let k = cfg.grid.density_points.max(2);
    let grid = (0..k)
        .map(|i| {
            let e = lo + (hi - lo) * i as f64 / (k - 1) as f64;
            let m = wigner_m(Complex64::new(e, 0.0), &a, 0.0, &s)?.value.m;
            Ok((e, m.im.max(0.0) / std::f64::consts::PI))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("E,rho\n");
    for (e, rho) in &grid {
        let _ = writeln!(csv, "{e},{rho:e}");
    }
    out.write("density.csv", csv)?;
    out.write_json("edges.json", &json!({ "edges": [upper.l, lower.l] }))?;
    let fig = Figure {
        title: "deformed semicircle density",
        x_label: "E",
        y_label: "rho(E)",
        series: vec![Series { label: "rho", points: grid, style: Style::Line }],
    };
    out.write("density.svg", fig.to_svg())?;
    println!("support [{:.12}, {:.12}]", lower.l, upper.l);
    Ok(Vec::new())
}

pub fn wigner_edges(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    let a = cfg.wigner()?.eigenvalues()?;
    let [lower, upper] = wigner_edge_points(&a);
    println!("L_+ = {:.12}", upper.l);
    println!("L_- = {:.12}", lower.l);
    out.write_json(
        "edges.json",
        &json!({
            "upper": { "l": upper.l, "zeta": upper.zeta, "varpi": upper.varpi },
            "lower": { "l": lower.l, "zeta": lower.zeta, "varpi": lower.varpi },
        }),
    )?;
    Ok(Vec::new())
}

pub fn wigner_verify_local_law(cfg: &RunConfig, debug: Debug, out: &mut Artifacts) -> Result<Vec<Check>> {
    real_entries(cfg)?;
    let def = deformation(cfg)?;
    let n = def.spectrum.len();
    let s = SolverSettings::default();
    let grid = wigner_grid(&def.spectrum, cfg.regularity.tau_prime, cfg.grid.n_points, &eta_ladder(cfg, n))?;
    let equivalents = grid
        .iter()
        .map(|&z| {
            let e = wigner_equivalents(z, &def.spectrum, def.basis.clone(), &s).with_context(|| format!("equivalents at z = {z}"))?;
            match debug.corrupt_m {
                Some(shift) => Ok(wigner_from_m(z, e.m + shift, &def.spectrum, def.basis.clone())?),
                None => Ok(e),
            }
        })
        .collect::<Result<Vec<WignerEquivalents>>>()?;
    let panel = VectorPanel::wigner(n, cfg.panel.n_vectors, def.basis.as_deref(), cfg.seed, 0);
    let mut scan = ErrorScan::default();
    for trial in 0..cfg.trials as u64 {
        let h = sample_deformed_wigner(&cfg.distribution, def.matrix.as_ref(), cfg.seed, trial)?;
        let fact = WignerFactorization::new(h.matrix.as_ref())?;
        scan.records.extend(wigner_scan(&fact, &equivalents, &panel.vectors, cfg.seed).records);
    }
    emit_scan(&scan, "Wigner local law errors", cfg, out)
}

/// Edge statistics of `W + A` against Gaussian `W` plus the diagonal matrix of the same spectrum.
pub fn wigner_edge_stats(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    real_entries(cfg)?;
    let def = deformation(cfg)?;
    let n = def.spectrum.len();
    let e = &cfg.edge;
    let sample = wigner_edge_samples(def.matrix.as_ref(), e.side, e.depth, cfg.trials, &cfg.distribution, cfg.seed)?;
    let diag = Mat::from_fn(n, n, |i, j| if i == j { def.spectrum[i] } else { 0.0 });
    let gauss = covlaws::sampler::EntryDistribution::gaussian();
    let reference = wigner_edge_samples(diag.as_ref(), e.side, e.depth, cfg.trials, &gauss, e.reference_seed.unwrap_or(cfg.seed + 1))?;
    compare_edges(cfg, &sample, &reference, "Gaussian W + D", out)
}

pub fn kcoeffs(cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<Check>> {
    let spec = cfg.kcoeffs.as_ref().context("config has no `kcoeffs` section")?;
    let moments = |explicit: &Option<Vec<f64>>, law: &Option<covlaws::sampler::EntryDistribution>, name: &str| match (explicit, law) {
        (Some(m), None) => Ok(m.clone()),
        (None, Some(l)) => Ok(l.moments(spec.n_max)?),
        _ => bail!("at `kcoeffs`: give exactly one of `moments{name}` and `law{name}`"),
    };
    let m0 = moments(&spec.moments0, &spec.law0, "0")?;
    let m1 = moments(&spec.moments1, &spec.law1, "1")?;
    let k = k_coefficients(&m0, &m1, spec.theta, spec.n_max)?;
    let mut csv = String::from("n,K\n");
    for (i, v) in k.iter().enumerate() {
        let _ = writeln!(csv, "{},{v:e}", i + 1);
        println!("K_{} = {v:.12e}", i + 1);
    }
    out.write("kcoeffs.csv", csv)?;
    Ok(Vec::new())
}
