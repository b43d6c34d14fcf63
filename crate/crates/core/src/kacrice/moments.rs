use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gaussfield::GaussianFieldModel;
use crate::kergin::PointConfiguration;
use crate::linalg::fit_line;
use crate::region::BoxDomain;
use crate::rng::{self, derive_seed};
use crate::stats::SampleStats;

use super::density::{kac_density_direct, kac_factorization, KacOptions};
use super::frame::SpacePair;

/// Configurations closer to the diagonal than this fraction of the box
/// diameter are redrawn during integration.
pub const DIAGONAL_GUARD: f64 = 1e-9;

const MAX_ATTEMPTS_PER_POINT: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentIntegration {
    /// Uniform configurations drawn in `box^p`.
    pub points: usize,
    /// Conditional Monte Carlo samples per configuration.
    pub inner_samples: usize,
    pub seed: u64,
    /// Largest tolerated fraction of draws rejected for degeneracy.
    pub max_degenerate_fraction: f64,
    pub execution: Execution,
}

impl Default for MomentIntegration {
    fn default() -> Self {
        MomentIntegration {
            points: 4000,
            inner_samples: 2000,
            seed: 0,
            max_degenerate_fraction: 0.01,
            execution: Execution::default(),
        }
    }
}

/// Estimate of `E[#Z^{[p]}] = ∫_{K^p} ρ_F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorialMoment {
    pub p: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub points: usize,
    /// Draws rejected by the diagonal guard.
    pub guarded: usize,
    /// Draws rejected because a covariance was numerically singular.
    pub degenerate: usize,
}

pub fn factorial_moment<M: GaussianFieldModel + ?Sized>(
    model: &M,
    bbox: &BoxDomain,
    p: usize,
    integration: &MomentIntegration,
) -> Result<FactorialMoment> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    if bbox.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: bbox.dim(),
        });
    }
    if integration.points < 2 {
        return Err(Error::InvalidArgument(
            "need at least two integration points".into(),
        ));
    }
    let guard = DIAGONAL_GUARD * bbox.diameter();
    let d = bbox.dim();
    let outcomes =
        integration
            .execution
            .map(integration.points, |i| -> Result<(f64, usize, usize)> {
                let mut r = rng::stream(integration.seed, i as u64);
                let inner = KacOptions::default()
                    .with_samples(integration.inner_samples)
                    .with_seed(derive_seed(integration.seed, i as u64))
                    .with_execution(Execution::Sequential);
                let (mut guarded, mut degenerate) = (0, 0);
                for _ in 0..MAX_ATTEMPTS_PER_POINT {
                    let points: Vec<Vec<f64>> = (0..p)
                        .map(|_| {
                            bbox.from_unit(&(0..d).map(|_| r.random::<f64>()).collect::<Vec<_>>())
                        })
                        .collect();
                    let config = PointConfiguration::with_box(points, bbox.clone())?;
                    if p > 1 && config.min_gap() < guard {
                        guarded += 1;
                        continue;
                    }
                    match kac_density_direct(model, &config, &inner) {
                        Ok(density) => return Ok((density.rho, guarded, degenerate)),
                        Err(e) if e.is_degeneracy() => degenerate += 1,
                        Err(e) => return Err(e),
                    }
                }
                Err(Error::TooManyDegenerateDraws { fraction: 1.0 })
            });
    let mut stats = SampleStats::new();
    let (mut guarded, mut degenerate) = (0, 0);
    for outcome in outcomes {
        let (rho, g, dg) = outcome?;
        stats.push(rho);
        guarded += g;
        degenerate += dg;
    }
    let fraction = degenerate as f64 / (integration.points + degenerate) as f64;
    if fraction > integration.max_degenerate_fraction {
        return Err(Error::TooManyDegenerateDraws { fraction });
    }
    let vol = bbox.volume().powi(p as i32);
    Ok(FactorialMoment {
        p,
        estimate: vol * stats.mean,
        stderr: vol * stats.stderr(),
        points: integration.points,
        guarded,
        degenerate,
    })
}

/// `n` points from `lo` to `hi` equally spaced on a log scale.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > 0.0 && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Least-squares fit of `log ρ(x, x + εu)` against `log ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub eps: Vec<f64>,
    pub rho: Vec<f64>,
    pub rho_se: Vec<f64>,
    /// Largest `ε` at which the covariance became singular; smaller values
    /// were dropped from the fit.
    pub truncated_at: Option<f64>,
}

/// Near-diagonal behaviour of the two-point Kac density. Every grid point
/// uses the same seed, so the Monte Carlo noise is common to the whole fit.
pub fn near_diagonal_exponent<M: GaussianFieldModel + ?Sized>(
    model: &M,
    x: &[f64],
    u: &[f64],
    eps_grid: &[f64],
    opts: &KacOptions,
) -> Result<ExponentFit> {
    if x.len() != model.dim() || u.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: x.len().max(u.len()),
        });
    }
    let mut grid: Vec<f64> = eps_grid.to_vec();
    if grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument(
            "grid values must be positive".into(),
        ));
    }
    grid.sort_by(|a, b| b.total_cmp(a));
    let (mut eps, mut rho, mut rho_se) = (Vec::new(), Vec::new(), Vec::new());
    let mut truncated_at = None;
    for &e in &grid {
        let y: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + e * b).collect();
        let config = PointConfiguration::new(vec![x.to_vec(), y])?;
        match kac_density_direct(model, &config, opts) {
            Ok(dens) => {
                eps.push(e);
                rho.push(dens.rho);
                rho_se.push(dens.rho_se);
            }
            Err(err) if err.is_degeneracy() => {
                truncated_at = Some(e);
                break;
            }
            Err(err) => return Err(err),
        }
    }
    if eps.len() < 2 {
        return Err(Error::DiagonalDegeneracy(format!(
            "only {} grid points before degeneracy",
            eps.len()
        )));
    }
    let lx: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ly: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    let (slope, intercept, residual) = fit_line(&lx, &ly);
    Ok(ExponentFit {
        slope,
        intercept,
        residual,
        eps,
        rho,
        rho_se,
        truncated_at,
    })
}

/// Configurations `(c + ε o_1, …, c + ε o_p)` for each `ε`.
pub fn collapse_path(
    center: &[f64],
    offsets: &[Vec<f64>],
    eps: &[f64],
) -> Result<Vec<PointConfiguration>> {
    eps.iter()
        .map(|&e| {
            let points = offsets
                .iter()
                .map(|o| {
                    if o.len() != center.len() {
                        return Err(Error::DimensionMismatch {
                            expected: center.len(),
                            found: o.len(),
                        });
                    }
                    Ok(center.iter().zip(o).map(|(c, v)| c + e * v).collect())
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            PointConfiguration::new(points)
        })
        .collect()
}

/// `σ_F`, `R` and `ρ` along a path of configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaProbe {
    pub gaps: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_se: Vec<f64>,
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    /// Slope of `log σ` against `log min_gap`, when the gaps vary.
    pub sigma_slope: Option<f64>,
    /// Slope of `log R` against `log min_gap`, when the gaps vary.
    pub r_slope: Option<f64>,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

pub fn sigma_boundedness_probe<M: GaussianFieldModel + ?Sized>(
    model: &M,
    spaces: &SpacePair,
    path: &[PointConfiguration],
    opts: &KacOptions,
) -> Result<SigmaProbe> {
    if path.is_empty() {
        return Err(Error::InvalidArgument("empty collapse path".into()));
    }
    let mut probe = SigmaProbe {
        gaps: Vec::new(),
        sigma: Vec::new(),
        sigma_se: Vec::new(),
        r: Vec::new(),
        rho: Vec::new(),
        sigma_slope: None,
        r_slope: None,
        sigma_min: f64::INFINITY,
        sigma_max: 0.0,
    };
    for config in path {
        let f = kac_factorization(model, spaces, config, opts)?;
        probe.gaps.push(config.min_gap());
        probe.sigma.push(f.sigma);
        probe.sigma_se.push(f.sigma_se);
        probe.r.push(f.r);
        probe.rho.push(f.rho);
        probe.sigma_min = probe.sigma_min.min(f.sigma);
        probe.sigma_max = probe.sigma_max.max(f.sigma);
    }
    let finite = probe.gaps.iter().all(|g| g.is_finite() && *g > 0.0);
    let varies = probe.gaps.iter().any(|g| *g != probe.gaps[0]);
    if finite && varies {
        let lx: Vec<f64> = probe.gaps.iter().map(|g| g.ln()).collect();
        let ls: Vec<f64> = probe.sigma.iter().map(|s| s.ln()).collect();
        let lr: Vec<f64> = probe.r.iter().map(|r| r.ln()).collect();
        probe.sigma_slope = Some(fit_line(&lx, &ls).0);
        probe.r_slope = Some(fit_line(&lx, &lr).0);
    }
    Ok(probe)
}

/// Stirling number of the second kind `S(n, k)`.
pub fn stirling2(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut row = vec![0.0; k + 1];
    row[0] = 1.0;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[k]
}

/// `x^{[p]} = x (x − 1) ⋯ (x − p + 1)`.
pub fn factorial_power(x: f64, p: usize) -> f64 {
    (0..p).map(|i| x - i as f64).product()
}

/// Raw moments `E[X^p] = Σ_j S(p, j) E[X^{[j]}]` from factorial moments
/// `factorial[j − 1] = E[X^{[j]}]`, for `p = 1..=factorial.len()`.
pub fn raw_moments(factorial: &[f64]) -> Vec<f64> {
    (1..=factorial.len())
        .map(|p| (1..=p).map(|j| stirling2(p, j) * factorial[j - 1]).sum())
        .collect()
}
