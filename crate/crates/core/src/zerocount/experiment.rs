use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gaussfield::{BfSampler, GaussianFieldModel};
use crate::kacrice::factorial_power;
use crate::region::BoxDomain;
use crate::stats::SampleStats;

use super::count::{
    adapted_critical_spacing, adapted_spacing, count_path_critical_points, count_path_zeros,
    CountOptions,
};

/// Smallest number of cells across the typical gap between zeros when the
/// grid is adapted to the model.
pub const CELLS_PER_GAP: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountTarget {
    /// Zeros of a square field.
    Zeros,
    /// Critical points of a scalar field.
    CriticalPoints,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentExperiment {
    pub target: CountTarget,
    pub samples: usize,
    pub p_max: usize,
    pub seed: u64,
    /// Series truncation tolerance of the sample paths.
    pub tol: f64,
    pub count: CountOptions,
    /// Largest tolerated fraction of samples with unresolved cells.
    pub max_unresolved_fraction: f64,
    pub execution: Execution,
}

impl Default for MomentExperiment {
    fn default() -> Self {
        MomentExperiment {
            target: CountTarget::Zeros,
            samples: 2000,
            p_max: 4,
            seed: 0,
            tol: 1e-9,
            count: CountOptions::default(),
            max_unresolved_fraction: 0.01,
            execution: Execution::default(),
        }
    }
}

/// Outcome of counting one sample path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleCount {
    pub index: usize,
    pub count: usize,
    pub residual_max: f64,
    pub suspect: bool,
    pub unresolved_cells: usize,
}

/// Empirical moment `E[g(X)]` of the count with its running means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub p: usize,
    pub n_samples: usize,
    /// Mean of the first `k + 1` samples at position `k`.
    pub running_means: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub max_count: usize,
    /// `|m_n − m_{⌈n/2⌉}| / |m_n|`, the relative change over the last half.
    pub drift: f64,
}

impl MomentEstimate {
    fn from_values(p: usize, values: &[f64], max_count: usize) -> Self {
        let mut stats = SampleStats::new();
        let running_means: Vec<f64> = values
            .iter()
            .map(|&v| {
                stats.push(v);
                stats.mean
            })
            .collect();
        let n = values.len();
        let half = running_means[n.div_ceil(2) - 1];
        let drift = if stats.mean == 0.0 {
            0.0
        } else {
            ((stats.mean - half) / stats.mean).abs()
        };
        MomentEstimate {
            p,
            n_samples: n,
            running_means,
            mean: stats.mean,
            stderr: stats.stderr(),
            max_count,
            drift,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub target: CountTarget,
    pub resolution: f64,
    pub counts: Vec<SampleCount>,
    /// `E[X^p]` for `p = 1..=p_max`.
    pub moments: Vec<MomentEstimate>,
    /// `E[X^{[p]}]` for `p = 1..=p_max`.
    pub factorial_moments: Vec<MomentEstimate>,
    pub unresolved_fraction: f64,
    /// Set when the unresolved fraction exceeds the tolerance.
    pub flagged: bool,
}

/// Counts zeros or critical points of `samples` independent paths of a
/// Bargmann–Fock model and forms the empirical moments of the count.
///
/// Sample `i` uses the stream `(seed, i)`; moments are reduced in index
/// order. When no resolution is set the grid is adapted to the model.
pub fn moment_experiment<M: GaussianFieldModel + ?Sized>(
    model: &M,
    bbox: &BoxDomain,
    cfg: &MomentExperiment,
) -> Result<MomentReport> {
    let d = model.dim();
    if bbox.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bbox.dim(),
        });
    }
    if cfg.samples < 2 || cfg.p_max == 0 {
        return Err(Error::InvalidArgument(
            "need at least two samples and p_max >= 1".into(),
        ));
    }
    let expected_codim = match cfg.target {
        CountTarget::Zeros => d,
        CountTarget::CriticalPoints => 1,
    };
    if model.codim() != expected_codim {
        return Err(Error::DimensionMismatch {
            expected: expected_codim,
            found: model.codim(),
        });
    }
    let order = match cfg.target {
        CountTarget::Zeros => 1,
        CountTarget::CriticalPoints => 2,
    };
    let sampler = BfSampler::for_model(model, bbox, cfg.tol, order)?;
    let mut count_opts = cfg.count;
    if count_opts.resolution.is_none() {
        let base = count_opts.spacing();
        let spacing = match cfg.target {
            CountTarget::Zeros => adapted_spacing(model, bbox, base, CELLS_PER_GAP),
            CountTarget::CriticalPoints => {
                adapted_critical_spacing(model, bbox, base, CELLS_PER_GAP)
            }
        };
        count_opts.resolution = Some(spacing);
    }
    let counts = cfg.execution.map(cfg.samples, |i| -> Result<SampleCount> {
        let path = sampler.draw(cfg.seed, i as u64)?;
        let zeros = match cfg.target {
            CountTarget::Zeros => count_path_zeros(&path, bbox, &count_opts)?,
            CountTarget::CriticalPoints => count_path_critical_points(&path, 0, bbox, &count_opts)?,
        };
        Ok(SampleCount {
            index: i,
            count: zeros.count(),
            residual_max: zeros.max_residual(),
            suspect: zeros.suspect,
            unresolved_cells: zeros.unresolved_cells,
        })
    });
    let counts: Vec<SampleCount> = counts.into_iter().collect::<Result<_>>()?;
    let max_count = counts.iter().map(|c| c.count).max().unwrap_or(0);
    let xs: Vec<f64> = counts.iter().map(|c| c.count as f64).collect();
    let moments = (1..=cfg.p_max)
        .map(|p| {
            MomentEstimate::from_values(
                p,
                &xs.iter().map(|x| x.powi(p as i32)).collect::<Vec<_>>(),
                max_count,
            )
        })
        .collect();
    let factorial_moments = (1..=cfg.p_max)
        .map(|p| {
            MomentEstimate::from_values(
                p,
                &xs.iter()
                    .map(|&x| factorial_power(x, p))
                    .collect::<Vec<_>>(),
                max_count,
            )
        })
        .collect();
    let unresolved = counts.iter().filter(|c| c.unresolved_cells > 0).count();
    let unresolved_fraction = unresolved as f64 / cfg.samples as f64;
    Ok(MomentReport {
        target: cfg.target,
        resolution: count_opts.spacing(),
        counts,
        moments,
        factorial_moments,
        unresolved_fraction,
        flagged: unresolved_fraction > cfg.max_unresolved_fraction,
    })
}
