use anyhow::{Context, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use critmoments::exec::Execution;
use critmoments::gaussfield::{
    BargmannFock, GaussianFieldModel, GradientModel, ProductOfIndependents,
};
use critmoments::kacrice::{
    collapse_path, kac_factorization, log_spaced, near_diagonal_exponent, sigma_boundedness_probe,
    KacOptions, SpacePair,
};
use critmoments::kergin::{kergin_suite, PointConfiguration, SuiteCheck};
use critmoments::polyalg::{basis_len, PolyVectorField, Polynomial};
use critmoments::rng::{derive_seed, fill_standard_normal, stream};
use critmoments::zerocount::{
    bezout_check, crofton_volume, moment_experiment, sphere_volume, CountOptions, CroftonOptions,
    MomentExperiment,
};
use critmoments::BoxDomain;

use crate::config::{hex, ExperimentConfig, ExperimentKind, ModelKind, ModelSpec, SurfaceKind};

/// Relative drift tolerated between the half-way and final running means.
pub const DRIFT_TOL: f64 = 0.05;
/// Tolerated deviation of the near-diagonal slope from `2 − d`.
pub const EXPONENT_TOL: f64 = 0.3;
/// Largest tolerated `|slope|` of `log σ` against `log ε`.
pub const SIGMA_SLOPE_TOL: f64 = 0.2;
/// Standard errors allowed between `ρ` and `R σ`.
pub const IDENTITY_SE: f64 = 3.0;
/// Relative tolerance of Crofton estimates against known volumes.
pub const CROFTON_REL_TOL: f64 = 0.1;
/// Smallest pairwise distance of random configurations, relative to the
/// box diameter.
const MIN_GAP_FRACTION: f64 = 0.1;

/// An acceptance tolerance applied to one experiment output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

/// Everything a run writes apart from the manifest.
#[derive(Debug)]
pub struct Artifacts {
    pub csv_name: String,
    pub csv: Vec<u8>,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
}

#[derive(Serialize, Deserialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    pub config_hash: String,
    pub results: serde_json::Value,
    pub checks: Vec<Check>,
}

pub fn run(cfg: &ExperimentConfig, execution: Execution) -> Result<Artifacts> {
    let (rows, results, checks) = match cfg.kind {
        ExperimentKind::KerginSuite => kergin(cfg, execution)?,
        ExperimentKind::Factorization => factorization(cfg, execution)?,
        ExperimentKind::Exponent => exponent(cfg, execution)?,
        ExperimentKind::SigmaProbe => sigma_probe(cfg, execution)?,
        ExperimentKind::Moments => moments(cfg, execution)?,
        ExperimentKind::Bezout => bezout(cfg, execution)?,
        ExperimentKind::Crofton => crofton(cfg, execution)?,
    };
    Ok(Artifacts {
        csv_name: format!("{}.csv", cfg.kind),
        csv: rows,
        results,
        checks,
    })
}

type Outcome = (Vec<u8>, serde_json::Value, Vec<Check>);

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(w.into_inner()?)
}

fn build_model(spec: &ModelSpec) -> Box<dyn GaussianFieldModel> {
    match spec.kind {
        ModelKind::BargmannFock => Box::new(BargmannFock::new(spec.dim)),
        ModelKind::Product => Box::new(ProductOfIndependents::new(spec.dim, spec.codim())),
        ModelKind::Gradient => Box::new(GradientModel::new(BargmannFock::new(spec.dim))),
    }
}

fn spaces(spec: &ModelSpec, p: usize) -> SpacePair {
    match spec.kind {
        ModelKind::Gradient => SpacePair::gradient(spec.dim, p),
        _ => SpacePair::vector(spec.dim, p),
    }
}

fn bbox(cfg: &ExperimentConfig) -> Result<BoxDomain> {
    Ok(cfg.bbox.as_ref().context("missing box")?.domain()?)
}

fn count_options(cfg: &ExperimentConfig) -> CountOptions {
    let mut opts = CountOptions::default();
    opts.resolution = cfg.budgets.resolution;
    opts
}

fn kac_options(cfg: &ExperimentConfig, seed: u64, execution: Execution) -> KacOptions {
    KacOptions::default()
        .with_samples(cfg.budgets.mc_samples.unwrap_or_default())
        .with_seed(seed)
        .with_execution(execution)
}

/// First 16 hex digits of the SHA-256 of the coordinates' bit patterns.
pub fn config_hash(points: &[Vec<f64>]) -> String {
    let mut h = Sha256::new();
    for x in points.iter().flatten() {
        h.update(x.to_bits().to_le_bytes());
    }
    hex(&h.finalize()[..8])
}

/// One check of one Kergin suite case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KerginRow {
    pub seed: u64,
    pub case: usize,
    pub check: SuiteCheck,
    pub dim: usize,
    pub p: usize,
    pub error: f64,
}

fn kergin(cfg: &ExperimentConfig, execution: Execution) -> Result<Outcome> {
    let n = cfg.budgets.n_samples.unwrap_or_default();
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        for r in kergin_suite(n, seed, execution)? {
            rows.push(KerginRow {
                seed,
                case: r.case,
                check: r.check,
                dim: r.dim,
                p: r.p,
                error: r.error,
            });
        }
    }
    let mut checks = Vec::new();
    let mut counts = serde_json::Map::new();
    for check in SuiteCheck::ALL {
        let errors: Vec<f64> = rows
            .iter()
            .filter(|r| r.check == check)
            .map(|r| r.error)
            .collect();
        counts.insert(check.name().into(), errors.len().into());
        if !errors.is_empty() {
            let worst = errors.iter().copied().fold(0.0, f64::max);
            checks.push(Check::at_most(
                format!("max {check} error"),
                worst,
                check.tolerance(),
            ));
        }
    }
    let results = serde_json::json!({ "cases_per_seed": n, "records": counts });
    Ok((to_csv(&rows)?, results, checks))
}

/// `p` uniform points in the box, pairwise at least `MIN_GAP_FRACTION`
/// diameters apart.
fn random_configuration(bbox: &BoxDomain, p: usize, seed: u64, index: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, index);
    let min_gap = MIN_GAP_FRACTION * bbox.diameter();
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(p);
    while points.len() < p {
        let u: Vec<f64> = (0..bbox.dim()).map(|_| rng.random::<f64>()).collect();
        let x = bbox.from_unit(&u);
        let far = points.iter().all(|y| {
            x.iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                >= min_gap
        });
        if far {
            points.push(x);
        }
    }
    points
}

/// One configuration of a factorization run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationRow {
    #[serde(rename = "config-hash")]
    pub config_hash: String,
    pub rho: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub sigma: f64,
    /// Combined standard error of `ρ − R σ`.
    pub stderr: f64,
    pub seed: u64,
}

fn factorization(cfg: &ExperimentConfig, execution: Execution) -> Result<Outcome> {
    let spec = cfg.model.as_ref().context("missing model")?;
    let model = build_model(spec);
    let p = cfg.p.unwrap_or_default();
    let pair = spaces(spec, p);
    let bbox = bbox(cfg)?;
    let n = cfg.budgets.n_samples.unwrap_or_default();
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        for i in 0..n {
            let points = random_configuration(&bbox, p, seed, i as u64);
            let config = PointConfiguration::new(points.clone())?;
            let f = kac_factorization(
                model.as_ref(),
                &pair,
                &config,
                &kac_options(cfg, derive_seed(seed, i as u64), execution),
            )
            .with_context(|| format!("configuration {i} of seed {seed}: points {points:?}"))?;
            rows.push(FactorizationRow {
                config_hash: config_hash(&points),
                rho: f.rho,
                r: f.r,
                sigma: f.sigma,
                stderr: f.combined_se,
                seed,
            });
        }
    }
    let worst_se = rows
        .iter()
        .map(|r| (r.rho - r.r * r.sigma).abs() / r.stderr)
        .fold(0.0, f64::max);
    let worst_rel = rows
        .iter()
        .map(|r| (r.rho - r.r * r.sigma).abs() / r.rho)
        .fold(0.0, f64::max);
    let results = serde_json::json!({
        "configurations": rows.len(),
        "max_identity_gap_in_se": worst_se,
        "max_relative_gap": worst_rel,
    });
    let checks = vec![Check::at_most(
        "max |rho - R sigma| / stderr",
        worst_se,
        IDENTITY_SE,
    )];
    Ok((to_csv(&rows)?, results, checks))
}

fn unit_direction(d: usize) -> Vec<f64> {
    let mut u = vec![0.0; d];
    u[0] = 1.0;
    u
}

fn exponent(cfg: &ExperimentConfig, execution: Execution) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Row {
        seed: u64,
        eps: f64,
        rho: f64,
        rho_se: f64,
    }
    #[derive(Serialize)]
    struct Fit {
        seed: u64,
        slope: f64,
        intercept: f64,
        residual: f64,
        truncated_at: Option<f64>,
    }
    let spec = cfg.model.as_ref().context("missing model")?;
    let model = build_model(spec);
    let bbox = bbox(cfg)?;
    let d = spec.dim;
    let grid = cfg.eps_grid();
    let eps = log_spaced(grid.min, grid.max, grid.points);
    let (mut rows, mut fits) = (Vec::new(), Vec::new());
    for &seed in &cfg.seeds {
        let fit = near_diagonal_exponent(
            model.as_ref(),
            &bbox.center(),
            &unit_direction(d),
            &eps,
            &kac_options(cfg, seed, execution),
        )
        .with_context(|| format!("exponent fit for seed {seed}"))?;
        for i in 0..fit.eps.len() {
            rows.push(Row {
                seed,
                eps: fit.eps[i],
                rho: fit.rho[i],
                rho_se: fit.rho_se[i],
            });
        }
        fits.push(Fit {
            seed,
            slope: fit.slope,
            intercept: fit.intercept,
            residual: fit.residual,
            truncated_at: fit.truncated_at,
        });
    }
    // The `2 − d` law is for zeros of independent components.
    let expected = (spec.kind != ModelKind::Gradient).then_some(2.0 - d as f64);
    let mut checks = Vec::new();
    if let Some(e) = expected {
        let worst = fits.iter().map(|f| (f.slope - e).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most("max |slope - (2 - d)|", worst, EXPONENT_TOL));
    }
    let results = serde_json::json!({ "dim": d, "expected_slope": expected, "fits": fits });
    Ok((to_csv(&rows)?, results, checks))
}

/// Offsets `(0, u_1, …, u_{p−1})` with unit directions drawn from the seed.
fn collapse_offsets(d: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; d]];
    for j in 1..p {
        let mut u = vec![0.0; d];
        fill_standard_normal(&mut stream(seed, j as u64), &mut u);
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        out.push(u.iter().map(|v| v / norm).collect());
    }
    out
}

fn sigma_probe(cfg: &ExperimentConfig, execution: Execution) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Row {
        seed: u64,
        eps: f64,
        gap: f64,
        rho: f64,
        #[serde(rename = "R")]
        r: f64,
        sigma: f64,
        sigma_se: f64,
    }
    #[derive(Serialize)]
    struct Fit {
        seed: u64,
        sigma_slope: Option<f64>,
        r_slope: Option<f64>,
        sigma_min: f64,
        sigma_max: f64,
    }
    let spec = cfg.model.as_ref().context("missing model")?;
    let model = build_model(spec);
    let p = cfg.p.unwrap_or_default();
    let pair = spaces(spec, p);
    let bbox = bbox(cfg)?;
    let grid = cfg.eps_grid();
    let eps = log_spaced(grid.min, grid.max, grid.points);
    let (mut rows, mut fits) = (Vec::new(), Vec::new());
    for &seed in &cfg.seeds {
        let offsets = collapse_offsets(spec.dim, p, seed);
        let path = collapse_path(&bbox.center(), &offsets, &eps)?;
        let probe = sigma_boundedness_probe(
            model.as_ref(),
            &pair,
            &path,
            &kac_options(cfg, seed, execution),
        )
        .with_context(|| format!("collapse path for seed {seed}: offsets {offsets:?}"))?;
        for i in 0..eps.len() {
            rows.push(Row {
                seed,
                eps: eps[i],
                gap: probe.gaps[i],
                rho: probe.rho[i],
                r: probe.r[i],
                sigma: probe.sigma[i],
                sigma_se: probe.sigma_se[i],
            });
        }
        fits.push(Fit {
            seed,
            sigma_slope: probe.sigma_slope,
            r_slope: probe.r_slope,
            sigma_min: probe.sigma_min,
            sigma_max: probe.sigma_max,
        });
    }
    let mut checks = Vec::new();
    if p >= 2 {
        let worst = fits
            .iter()
            .filter_map(|f| f.sigma_slope)
            .map(f64::abs)
            .fold(0.0, f64::max);
        checks.push(Check::at_most("max |sigma slope|", worst, SIGMA_SLOPE_TOL));
    }
    let results = serde_json::json!({ "dim": spec.dim, "p": p, "fits": fits });
    Ok((to_csv(&rows)?, results, checks))
}

/// Per-sample rows of a moments run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub seed: u64,
    #[serde(rename = "seed-index")]
    pub seed_index: usize,
    pub count: usize,
    #[serde(rename = "residual-max")]
    pub residual_max: f64,
    pub suspect: bool,
}

fn moments(cfg: &ExperimentConfig, execution: Execution) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Moment {
        seed: u64,
        p: usize,
        mean: f64,
        stderr: f64,
        n: usize,
        max_count: usize,
        drift: f64,
        factorial_mean: f64,
        factorial_stderr: f64,
    }
    let spec = cfg.model.as_ref().context("missing model")?;
    let model = build_model(spec);
    let bbox = bbox(cfg)?;
    let (mut rows, mut stats, mut flags) = (Vec::new(), Vec::new(), Vec::new());
    for &seed in &cfg.seeds {
        let mut experiment = MomentExperiment {
            target: cfg.target(),
            samples: cfg.budgets.n_samples.unwrap_or_default(),
            p_max: cfg.p.unwrap_or_default(),
            seed,
            count: count_options(cfg),
            execution,
            ..Default::default()
        };
        if let Some(tol) = spec.tol {
            experiment.tol = tol;
        }
        let report = moment_experiment(model.as_ref(), &bbox, &experiment)
            .with_context(|| format!("moment experiment for seed {seed}"))?;
        rows.extend(report.counts.iter().map(|c| MomentRow {
            seed,
            seed_index: c.index,
            count: c.count,
            residual_max: c.residual_max,
            suspect: c.suspect,
        }));
        for (m, f) in report.moments.iter().zip(&report.factorial_moments) {
            stats.push(Moment {
                seed,
                p: m.p,
                mean: m.mean,
                stderr: m.stderr,
                n: m.n_samples,
                max_count: m.max_count,
                drift: m.drift,
                factorial_mean: f.mean,
                factorial_stderr: f.stderr,
            });
        }
        flags.push(serde_json::json!({
            "seed": seed,
            "resolution": report.resolution,
            "unresolved_fraction": report.unresolved_fraction,
            "flagged": report.flagged,
        }));
    }
    let worst_drift = stats.iter().map(|m| m.drift).fold(0.0, f64::max);
    let unresolved = flags
        .iter()
        .filter_map(|f| f["unresolved_fraction"].as_f64())
        .fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("max running-mean drift", worst_drift, DRIFT_TOL),
        Check::at_most(
            "max unresolved fraction",
            unresolved,
            MomentExperiment::default().max_unresolved_fraction,
        ),
    ];
    let results = serde_json::json!({ "target": cfg.target(), "moments": stats, "runs": flags });
    Ok((to_csv(&rows)?, results, checks))
}

fn random_system(d: usize, degree: usize, seed: u64, index: u64) -> Result<PolyVectorField<f64>> {
    let mut rng = stream(seed, index);
    let comps = (0..d)
        .map(|_| {
            let mut c = vec![0.0; basis_len(d, degree)];
            fill_standard_normal(&mut rng, &mut c);
            Polynomial::from_coeffs(d, degree, c)
        })
        .collect::<critmoments::Result<Vec<_>>>()?;
    Ok(PolyVectorField::new(comps)?)
}

/// Per-system rows of a Bezout run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BezoutRow {
    pub seed: u64,
    pub index: usize,
    pub count: usize,
    pub bound: usize,
    pub complex_count: Option<usize>,
    pub suspect: bool,
}

fn bezout(cfg: &ExperimentConfig, execution: Execution) -> Result<Outcome> {
    let bbox = bbox(cfg)?;
    let d = bbox.dim();
    let degree = cfg.p.unwrap_or_default();
    let n = cfg.budgets.n_samples.unwrap_or_default();
    let opts = count_options(cfg);
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let checks = execution.map(n, |i| -> Result<BezoutRow> {
            let system = random_system(d, degree, seed, i as u64)?;
            let check = bezout_check(&system, &bbox, &opts)?;
            Ok(BezoutRow {
                seed,
                index: i,
                count: check.count,
                bound: check.bound,
                complex_count: check.complex_count,
                suspect: check.suspect,
            })
        });
        for row in checks {
            rows.push(row?);
        }
    }
    let violations = rows.iter().filter(|r| r.count > r.bound).count();
    let suspect = rows.iter().filter(|r| r.suspect).count();
    let max_count = rows.iter().map(|r| r.count).max().unwrap_or(0);
    let mut checks = vec![Check::at_most("bound violations", violations as f64, 0.0)];
    let mut complex_mismatches = None;
    if d == 1 {
        let bad = rows
            .iter()
            .filter(|r| r.complex_count != Some(degree))
            .count();
        complex_mismatches = Some(bad);
        checks.push(Check::at_most(
            "complex root count != degree",
            bad as f64,
            0.0,
        ));
    }
    let results = serde_json::json!({
        "systems": rows.len(),
        "dim": d,
        "degree": degree,
        "bound": degree.pow(d as u32),
        "violations": violations,
        "max_count": max_count,
        "suspect": suspect,
        "complex_mismatches": complex_mismatches,
    });
    Ok((to_csv(&rows)?, results, checks))
}

fn crofton(cfg: &ExperimentConfig, execution: Execution) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Row {
        seed: u64,
        estimate: f64,
        stderr: f64,
        mean_count: f64,
        probes: usize,
        suspect_probes: usize,
    }
    let bbox = bbox(cfg)?;
    let d = bbox.dim();
    let c = bbox.center();
    let surface = cfg.surface.as_ref().context("missing surface")?;
    let (poly, exact) = match surface.kind {
        SurfaceKind::Hyperplane => {
            let area: f64 = bbox.widths()[1..].iter().product();
            (
                Polynomial::constant(d, 0, 1.0).mul_linear(0, c[0]),
                Some(area),
            )
        }
        SurfaceKind::Sphere => {
            let r = surface.radius.unwrap_or_default();
            let mut f = Polynomial::constant(d, 0, -r * r);
            for (i, &ci) in c.iter().enumerate() {
                let sq = Polynomial::constant(d, 0, 1.0)
                    .mul_linear(i, ci)
                    .mul_linear(i, ci);
                f = f.add(&sq);
            }
            let inside = bbox.widths().iter().all(|w| r < 0.5 * w);
            (
                f,
                inside.then(|| sphere_volume(d - 1) * r.powi(d as i32 - 1)),
            )
        }
    };
    let field = PolyVectorField::new(vec![poly])?;
    let mut count = CountOptions::default();
    count.resolution = cfg.budgets.resolution;
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let est = crofton_volume(
            &field,
            &bbox,
            d - 1,
            &CroftonOptions {
                probes: cfg.budgets.n_samples.unwrap_or_default(),
                seed,
                count,
                execution,
                ..Default::default()
            },
        )?;
        rows.push(Row {
            seed,
            estimate: est.estimate,
            stderr: est.stderr,
            mean_count: est.mean_count,
            probes: est.probes,
            suspect_probes: est.suspect_probes,
        });
    }
    let mut checks = Vec::new();
    if let Some(exact) = exact {
        let worst = rows
            .iter()
            .map(|r| (r.estimate - exact).abs() / exact)
            .fold(0.0, f64::max);
        checks.push(Check::at_most("max relative error", worst, CROFTON_REL_TOL));
    }
    let results = serde_json::json!({ "n": d - 1, "exact": exact, "estimates": rows });
    Ok((to_csv(&rows)?, results, checks))
}
