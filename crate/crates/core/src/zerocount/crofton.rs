use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gaussfield::{BfSampler, SamplePath};
use crate::kergin::VectorJet;
use crate::region::BoxDomain;
use crate::stats::SampleStats;

use super::count::{count_zeros_on_grid, CountOptions};
use super::grid::{grid_axes, GridSample};

/// `vol(S^n)`.
pub fn sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n - 1) as f64 * sphere_volume(n - 2),
    }
}

/// `v_n = vol(S^n) / 2`.
pub fn crofton_constant(n: usize) -> f64 {
    0.5 * sphere_volume(n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CroftonOptions {
    pub probes: usize,
    pub seed: u64,
    /// Series truncation tolerance of the probe fields.
    pub tol: f64,
    pub count: CountOptions,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for CroftonOptions {
    fn default() -> Self {
        CroftonOptions {
            probes: 2000,
            seed: 0,
            tol: 1e-9,
            count: CountOptions::default(),
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CroftonEstimate {
    pub n: usize,
    /// `v_n` times the mean intersection count.
    pub estimate: f64,
    pub stderr: f64,
    pub mean_count: f64,
    pub probes: usize,
    /// Probes whose count was flagged as suspect.
    pub suspect_probes: usize,
}

/// `(F, φ_1, …, φ_n)` for a field `F: R^d → R^{d−n}` and a probe path.
struct Augmented<'a, F: ?Sized> {
    f: &'a F,
    probe: &'a SamplePath,
}

impl<F: VectorJet<f64> + ?Sized> VectorJet<f64> for Augmented<'_, F> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn codim(&self) -> usize {
        self.f.codim() + self.probe.codim()
    }

    fn order(&self) -> usize {
        self.f.order()
    }

    fn jets(&self, x: &[f64], order: usize) -> Vec<Vec<f64>> {
        let mut out = self.f.jets(x, order);
        out.extend(self.probe.jets(x, order));
        out
    }
}

/// Nodal `n`-volume of `F: R^d → R^{d−n}` in the box, as `v_n` times the
/// mean number of common zeros of `F` and `n` independent real
/// Bargmann–Fock probe fields.
pub fn crofton_volume<F: VectorJet<f64> + ?Sized>(
    f: &F,
    bbox: &BoxDomain,
    n: usize,
    opts: &CroftonOptions,
) -> Result<CroftonEstimate> {
    let d = bbox.dim();
    if f.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: f.dim(),
        });
    }
    if n == 0 || n >= d {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= n < d, got n = {n}, d = {d}"
        )));
    }
    if f.codim() != d - n {
        return Err(Error::DimensionMismatch {
            expected: d - n,
            found: f.codim(),
        });
    }
    if opts.probes < 2 {
        return Err(Error::InvalidArgument("need at least two probes".into()));
    }
    let sampler = BfSampler::real(d, n, bbox, opts.tol, 1)?;
    let base = GridSample::from_field(f, grid_axes(bbox, opts.count.spacing())?)?;
    let outcomes = opts
        .execution
        .map(opts.probes, |i| -> Result<(usize, bool)> {
            let probe = sampler.draw(opts.seed, i as u64)?;
            let grid = base
                .clone()
                .stack(&GridSample::from_path(&probe, base.axes().to_vec())?)?;
            let zeros =
                count_zeros_on_grid(&Augmented { f, probe: &probe }, bbox, &grid, &opts.count)?;
            Ok((zeros.count(), zeros.suspect))
        });
    let mut stats = SampleStats::new();
    let mut suspect_probes = 0;
    for outcome in outcomes {
        let (count, suspect) = outcome?;
        stats.push(count as f64);
        suspect_probes += suspect as usize;
    }
    let v = crofton_constant(n);
    Ok(CroftonEstimate {
        n,
        estimate: v * stats.mean,
        stderr: v * stats.stderr(),
        mean_count: stats.mean,
        probes: opts.probes,
        suspect_probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{PolyVectorField, Polynomial};

    #[test]
    fn crofton_constants() {
        assert_eq!(crofton_constant(1), PI);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((crofton_constant(4) - 4.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn length_of_a_segment() {
        let f = PolyVectorField::new(vec![Polynomial::variable(2, 0)]).unwrap();
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let est = crofton_volume(
            &f,
            &bbox,
            1,
            &CroftonOptions {
                seed: 8,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((est.estimate - 2.0).abs() < 0.2, "{est:?}");
        assert!((est.estimate - 2.0).abs() < 4.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn circumference_of_a_circle() {
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let circle = x
            .mul_linear(0, 0.0)
            .add(&y.mul_linear(1, 0.0))
            .sub(&Polynomial::constant(2, 0, 0.25));
        let f = PolyVectorField::new(vec![circle]).unwrap();
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let est = crofton_volume(
            &f,
            &bbox,
            1,
            &CroftonOptions {
                seed: 9,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((est.estimate - PI).abs() < 0.1 * PI, "{est:?}");
        assert!((est.estimate - PI).abs() < 4.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn doubling_probes_shrinks_the_error() {
        let f = PolyVectorField::new(vec![Polynomial::variable(2, 0)]).unwrap();
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let small = crofton_volume(
            &f,
            &bbox,
            1,
            &CroftonOptions {
                probes: 1000,
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let large = crofton_volume(
            &f,
            &bbox,
            1,
            &CroftonOptions {
                probes: 2000,
                seed: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let ratio = small.stderr / large.stderr;
        assert!((ratio - 2f64.sqrt()).abs() < 0.15, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_codimension() {
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let f = PolyVectorField::identity(2);
        assert!(crofton_volume(&f, &bbox, 1, &CroftonOptions::default()).is_err());
        assert!(crofton_volume(&f, &bbox, 0, &CroftonOptions::default()).is_err());
    }
}
