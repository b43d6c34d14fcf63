use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussfield::{GaussianFieldModel, SamplePath, Site};
use crate::kergin::{Gradient, Jet, VectorJet};
use crate::polyalg::MultiIndex;
use crate::region::BoxDomain;

use super::grid::{grid_axes, GridSample};
use super::newton::{bracketed_root, newton, NewtonOptions, Root};

/// Default grid density per unit length along each axis.
pub const DEFAULT_POINTS_PER_UNIT: f64 = 32.0;

/// Default dedupe radius as a fraction of the box diameter.
pub const DEDUPE_FRACTION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountOptions {
    /// Grid spacing. When unset, `1 / points_per_unit`.
    pub resolution: Option<f64>,
    pub points_per_unit: f64,
    pub newton: NewtonOptions,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            resolution: None,
            points_per_unit: DEFAULT_POINTS_PER_UNIT,
            newton: NewtonOptions::default(),
        }
    }
}

impl CountOptions {
    pub fn with_resolution(mut self, spacing: f64) -> Self {
        self.resolution = Some(spacing);
        self
    }

    pub fn spacing(&self) -> f64 {
        self.resolution.unwrap_or(1.0 / self.points_per_unit)
    }

    pub fn dedupe_radius(&self, bbox: &BoxDomain) -> f64 {
        self.newton
            .dedupe_radius
            .unwrap_or(DEDUPE_FRACTION * bbox.diameter())
    }
}

/// Zeros located in the interior of a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub points: Vec<Vec<f64>>,
    /// `max_i |F_i|` at each point.
    pub residuals: Vec<f64>,
    /// Grid spacing used for seeding.
    pub resolution: f64,
    /// Set when the count may be wrong: two retained zeros within twice the
    /// dedupe radius, an unresolved cell, a near-singular Jacobian at a zero,
    /// or a residual above tolerance.
    pub suspect: bool,
    /// Flagged cells on which Newton diverged from every seed.
    pub unresolved_cells: usize,
    /// Retained zeros with a near-singular Jacobian.
    pub near_singular: usize,
    /// Largest `|F_i|` on the grid.
    pub field_scale: f64,
}

impl ZeroSet {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }
}

fn check_square<F: VectorJet<f64> + ?Sized>(f: &F, bbox: &BoxDomain) -> Result<()> {
    if f.dim() != bbox.dim() {
        return Err(Error::DimensionMismatch {
            expected: bbox.dim(),
            found: f.dim(),
        });
    }
    if f.codim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: f.codim(),
        });
    }
    if f.order() < 1 {
        return Err(Error::JetOrderTooLow {
            required: 1,
            available: f.order(),
        });
    }
    Ok(())
}

/// Zeros of a square field `F: R^d → R^d` in the interior of the box.
pub fn count_zeros<F: VectorJet<f64> + ?Sized>(
    f: &F,
    bbox: &BoxDomain,
    opts: &CountOptions,
) -> Result<ZeroSet> {
    check_square(f, bbox)?;
    let grid = GridSample::from_field(f, grid_axes(bbox, opts.spacing())?)?;
    count_zeros_on_grid(f, bbox, &grid, opts)
}

/// Critical points of a scalar field, as zeros of its gradient with the
/// Hessian driving Newton.
pub fn count_critical_points<J: Jet<f64>>(
    f: &J,
    bbox: &BoxDomain,
    opts: &CountOptions,
) -> Result<ZeroSet> {
    if f.order() < 2 {
        return Err(Error::JetOrderTooLow {
            required: 2,
            available: f.order(),
        });
    }
    count_zeros(&Gradient(f), bbox, opts)
}

/// Zeros of a square sample path, seeded from tensor-grid jets.
pub fn count_path_zeros(
    path: &SamplePath,
    bbox: &BoxDomain,
    opts: &CountOptions,
) -> Result<ZeroSet> {
    check_square(path, bbox)?;
    let grid = GridSample::from_path(path, grid_axes(bbox, opts.spacing())?)?;
    count_zeros_on_grid(path, bbox, &grid, opts)
}

/// Critical points of component `c` of a sample path.
pub fn count_path_critical_points(
    path: &SamplePath,
    c: usize,
    bbox: &BoxDomain,
    opts: &CountOptions,
) -> Result<ZeroSet> {
    let grid = GridSample::from_path_gradient(path, c, grid_axes(bbox, opts.spacing())?)?;
    let f = Gradient(path.component(c));
    check_square(&f, bbox)?;
    count_zeros_on_grid(&f, bbox, &grid, opts)
}

/// Zeros of `f` seeded from precomputed grid values.
///
/// Seeds are the grid nodes whose Newton step is shorter than one cell, then
/// the centre and corners of every cell where each component changes sign
/// and no zero has been found yet. In one dimension a sign change is solved
/// by safeguarded Newton on the bracket instead.
pub fn count_zeros_on_grid<F: VectorJet<f64> + ?Sized>(
    f: &F,
    bbox: &BoxDomain,
    grid: &GridSample,
    opts: &CountOptions,
) -> Result<ZeroSet> {
    check_square(f, bbox)?;
    let d = bbox.dim();
    if grid.dim() != d || grid.codim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: grid.codim(),
        });
    }
    let spacing = grid.spacing();
    let field_scale = grid.max_abs_value();
    let jac_scale = (0..grid.len())
        .flat_map(|n| grid.jacobian(n).iter())
        .fold(0.0, |m: f64, v| m.max(v.abs()));
    let threshold = opts.newton.tol * (1.0 + field_scale);
    let radius = opts.dedupe_radius(bbox);
    let max_iter = opts.newton.max_iter;

    let mut candidates: Vec<Root> = Vec::new();
    let accept = |root: Root, candidates: &mut Vec<Root>| {
        if bbox.contains_with_margin(&root.x, -radius) {
            candidates.push(root);
        }
    };

    for node in 0..grid.len() {
        let jac = DMatrix::from_row_slice(d, d, grid.jacobian(node));
        let value = DVector::from_column_slice(grid.values(node));
        let Some(step) = jac.lu().solve(&value) else {
            continue;
        };
        if step.amax() <= spacing {
            if let Some(root) = newton(f, &grid.point(node), bbox, threshold, max_iter, jac_scale) {
                accept(root, &mut candidates);
            }
        }
    }

    let mut unresolved_cells = 0;
    for cell in 0..grid.cell_count() {
        let corners = grid.cell_corners(cell);
        let corner_values: Vec<&[f64]> = corners.iter().map(|&n| grid.values(n)).collect();
        if !straddles_zero(&corner_values) {
            continue;
        }
        let (lo, hi) = grid.cell_bounds(cell);
        let cell_box = BoxDomain::new(lo.clone(), hi.clone())?;
        if candidates
            .iter()
            .any(|r| cell_box.contains_with_margin(&r.x, radius))
        {
            continue;
        }
        if d == 1 {
            let (fa, fb) = (grid.values(corners[0])[0], grid.values(corners[1])[0]);
            let root = if fa == 0.0 {
                Root {
                    x: lo,
                    residual: 0.0,
                    near_singular: false,
                }
            } else if fb == 0.0 {
                Root {
                    x: hi,
                    residual: 0.0,
                    near_singular: false,
                }
            } else {
                bracketed_root(f, lo[0], hi[0], threshold, max_iter, jac_scale)
            };
            accept(root, &mut candidates);
            continue;
        }
        let center = cell_box.center();
        let seeds = std::iter::once(center).chain(corners.iter().map(|&n| grid.point(n)));
        let mut resolved = false;
        for seed in seeds {
            if let Some(root) = newton(f, &seed, bbox, threshold, max_iter, jac_scale) {
                accept(root, &mut candidates);
                resolved = true;
                break;
            }
        }
        if !resolved {
            let mut search = |x: &[f64]| newton(f, x, bbox, threshold, max_iter, jac_scale);
            let mut roots = Vec::new();
            if !refine_cell(f, &lo, &hi, REFINE_DEPTH, &mut search, &mut roots) {
                unresolved_cells += 1;
            }
            for root in roots {
                accept(root, &mut candidates);
            }
        }
    }

    let mut kept: Vec<Root> = Vec::new();
    for root in candidates {
        if !kept.iter().any(|k| distance(&k.x, &root.x) <= radius) {
            kept.push(root);
        }
    }
    let crowded = kept.iter().enumerate().any(|(i, a)| {
        kept[..i]
            .iter()
            .any(|b| distance(&a.x, &b.x) <= 2.0 * radius)
    });
    let near_singular = kept.iter().filter(|r| r.near_singular).count();
    let loose = kept.iter().any(|r| r.residual > threshold);
    Ok(ZeroSet {
        residuals: kept.iter().map(|r| r.residual).collect(),
        points: kept.into_iter().map(|r| r.x).collect(),
        resolution: spacing,
        suspect: crowded || unresolved_cells > 0 || near_singular > 0 || loose,
        unresolved_cells,
        near_singular,
        field_scale,
    })
}

/// Bisection levels tried on a flagged cell after Newton failed from its
/// centre and corners.
pub const REFINE_DEPTH: usize = 6;

/// True when every component takes both signs (or zero) on the corners.
fn straddles_zero(corner_values: &[&[f64]]) -> bool {
    let m = corner_values[0].len();
    (0..m).all(|i| {
        let (lo, hi) = corner_values
            .iter()
            .map(|v| v[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v), b.max(v))
            });
        lo <= 0.0 && hi >= 0.0
    })
}

/// Bisects a flagged cell, retrying Newton from the centre of each sub-cell
/// that still straddles zero. Sub-cells that straddle zero on none of their
/// children are taken to be empty, which is exact for affine fields. Returns
/// false when a sub-cell at the last level still straddles zero without a
/// Newton solution.
fn refine_cell<F: VectorJet<f64> + ?Sized>(
    f: &F,
    lo: &[f64],
    hi: &[f64],
    depth: usize,
    search: &mut dyn FnMut(&[f64]) -> Option<Root>,
    roots: &mut Vec<Root>,
) -> bool {
    let d = lo.len();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let levels = [lo, &mid[..], hi];
    // Values on the 3^d points of the half-spaced grid, first axis slowest.
    let n_pts = 3usize.pow(d as u32);
    let values: Vec<Vec<f64>> = (0..n_pts)
        .map(|flat| {
            let x: Vec<f64> = (0..d)
                .map(|i| levels[(flat / 3usize.pow((d - 1 - i) as u32)) % 3][i])
                .collect();
            f.jets(&x, 0).into_iter().map(|j| j[0]).collect()
        })
        .collect();
    for sub in 0..1usize << d {
        let offset: Vec<usize> = (0..d).map(|i| (sub >> i) & 1).collect();
        let corner_values: Vec<&[f64]> = (0..1usize << d)
            .map(|mask| {
                let flat = (0..d).fold(0, |acc, i| acc * 3 + offset[i] + ((mask >> i) & 1));
                values[flat].as_slice()
            })
            .collect();
        if !straddles_zero(&corner_values) {
            continue;
        }
        let sub_lo: Vec<f64> = (0..d).map(|i| levels[offset[i]][i]).collect();
        let sub_hi: Vec<f64> = (0..d).map(|i| levels[offset[i] + 1][i]).collect();
        let center: Vec<f64> = sub_lo
            .iter()
            .zip(&sub_hi)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        if let Some(root) = search(&center) {
            roots.push(root);
            continue;
        }
        if depth == 0 || !refine_cell(f, &sub_lo, &sub_hi, depth - 1, search, roots) {
            return false;
        }
    }
    true
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Grid spacing resolving the typical distance between zeros of `model` by
/// at least `cells` cells, and never coarser than `base`.
///
/// The typical distance along axis `v` for component `c` is
/// `π √(Var F_c / Var ∂_v F_c)` at the box centre, the mean gap between
/// zeros of a stationary process along a line.
pub fn adapted_spacing<M: GaussianFieldModel + ?Sized>(
    model: &M,
    bbox: &BoxDomain,
    base: f64,
    cells: f64,
) -> f64 {
    let d = model.dim();
    let fields: Vec<(MultiIndex, usize)> = (0..model.codim())
        .map(|c| (MultiIndex::zero(d), c))
        .collect();
    base.min(typical_gap(model, &bbox.center(), &fields) / cells)
}

/// [`adapted_spacing`] for the critical points of a scalar model, that is
/// for the zeros of its gradient.
pub fn adapted_critical_spacing<M: GaussianFieldModel + ?Sized>(
    model: &M,
    bbox: &BoxDomain,
    base: f64,
    cells: f64,
) -> f64 {
    let d = model.dim();
    let fields: Vec<(MultiIndex, usize)> = (0..d).map(|i| (MultiIndex::unit(d, i), 0)).collect();
    base.min(typical_gap(model, &bbox.center(), &fields) / cells)
}

/// Smallest `π √(Var ∂^α F_c / Var ∂_v ∂^α F_c)` over the listed fields.
fn typical_gap<M: GaussianFieldModel + ?Sized>(
    model: &M,
    x: &[f64],
    fields: &[(MultiIndex, usize)],
) -> f64 {
    let mut gap = f64::INFINITY;
    for (alpha, c) in fields {
        let value = Site::new(x.to_vec(), alpha.clone(), *c);
        let var0 = model.covariance(&value, &value);
        for v in 0..x.len() {
            let deriv = Site::new(x.to_vec(), alpha.with_increment(v), *c);
            let var1 = model.covariance(&deriv, &deriv);
            if var1 > 0.0 {
                gap = gap.min(std::f64::consts::PI * (var0 / var1).sqrt());
            }
        }
    }
    gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussfield::{BargmannFock, BfSampler, GradientModel, ProductOfIndependents};
    use crate::kergin::FnJet;
    use crate::polyalg::{PolyVectorField, Polynomial};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn circle_line() -> PolyVectorField<f64> {
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let circle = x
            .mul_linear(0, 0.0)
            .add(&y.mul_linear(1, 0.0))
            .sub(&Polynomial::constant(2, 0, 0.25));
        PolyVectorField::new(vec![circle, x.sub(&y)]).unwrap()
    }

    /// `Π (x − r)`.
    fn from_roots(roots: &[f64]) -> Polynomial<f64> {
        roots
            .iter()
            .fold(Polynomial::constant(1, 0, 1.0), |p, &r| p.mul_linear(0, r))
    }

    #[test]
    fn identity_has_one_zero_at_origin() {
        for d in 1..=3 {
            let bbox = BoxDomain::cube(d, -1.0, 1.0).unwrap();
            let opts = if d == 3 {
                CountOptions::default().with_resolution(0.1)
            } else {
                CountOptions::default()
            };
            let z = count_zeros(&PolyVectorField::identity(d), &bbox, &opts).unwrap();
            assert_eq!(z.count(), 1, "d = {d}");
            assert!(z.points[0].iter().all(|v| v.abs() < 1e-12));
            assert!(!z.suspect);
        }
    }

    #[test]
    fn quintic_with_known_roots() {
        let roots = [-0.93, -0.41, 0.07, 0.52, 0.81];
        let f = PolyVectorField::new(vec![from_roots(&roots)]).unwrap();
        let bbox = BoxDomain::cube(1, -1.0, 1.0).unwrap();
        let z = count_zeros(&f, &bbox, &CountOptions::default()).unwrap();
        assert_eq!(z.count(), 5);
        let mut found: Vec<f64> = z.points.iter().map(|p| p[0]).collect();
        found.sort_by(f64::total_cmp);
        for (a, b) in found.iter().zip(roots) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_meets_line_twice() {
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let z = count_zeros(&circle_line(), &bbox, &CountOptions::default()).unwrap();
        assert_eq!(z.count(), 2);
        let r = 0.5 / 2f64.sqrt();
        for p in &z.points {
            assert!((p[0].abs() - r).abs() < 1e-12 && (p[0] - p[1]).abs() < 1e-12);
        }
        assert!(z.max_residual() <= 1e-10 * (1.0 + z.field_scale));
    }

    #[test]
    fn constant_component_has_no_zeros() {
        let f = PolyVectorField::new(vec![
            Polynomial::variable(2, 0),
            Polynomial::constant(2, 1, 1.0),
        ])
        .unwrap();
        let z = count_zeros(
            &f,
            &BoxDomain::cube(2, -1.0, 1.0).unwrap(),
            &CountOptions::default(),
        )
        .unwrap();
        assert_eq!(z.count(), 0);
        assert!(!z.suspect);
    }

    #[test]
    fn paraboloid_has_one_critical_point() {
        let f = Polynomial::from_terms(
            2,
            2,
            [
                (MultiIndex::new(vec![2, 0]), 0.5),
                (MultiIndex::new(vec![0, 2]), 0.5),
            ],
        )
        .unwrap();
        let z = count_critical_points(
            &f,
            &BoxDomain::cube(2, -1.0, 1.0).unwrap(),
            &CountOptions::default(),
        )
        .unwrap();
        assert_eq!(z.count(), 1);
        assert!(z.points[0].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn cosine_critical_points() {
        let f = FnJet::new(1, usize::MAX, |a: &MultiIndex, x: &[f64]| {
            match a.order() % 4 {
                0 => x[0].cos(),
                1 => -x[0].sin(),
                2 => -x[0].cos(),
                _ => x[0].sin(),
            }
        });
        let located = |lo: f64, hi: f64| {
            let bbox = BoxDomain::cube(1, lo, hi).unwrap();
            let z = count_critical_points(&f, &bbox, &CountOptions::default()).unwrap();
            let mut xs: Vec<f64> = z.points.iter().map(|p| p[0]).collect();
            xs.sort_by(f64::total_cmp);
            xs
        };
        // kπ for k = 1, 2, 3 are interior to [0, 4π]; the endpoints are not.
        let closed = located(0.0, 4.0 * PI);
        assert_eq!(closed.len(), 3, "{closed:?}");
        // A window holding four of them away from its ends.
        let shifted = located(0.5, 4.0 * PI + 0.5);
        assert_eq!(shifted.len(), 4, "{shifted:?}");
        for (k, x) in shifted.iter().enumerate() {
            assert!((x - (k + 1) as f64 * PI).abs() < 1e-10);
        }
    }

    #[test]
    fn refinement_never_loses_zeros() {
        // Two close roots of a cubic and a transverse polynomial system.
        let cubic = PolyVectorField::new(vec![from_roots(&[0.2, 0.23, -0.6])]).unwrap();
        let b1 = BoxDomain::cube(1, -1.0, 1.0).unwrap();
        let b2 = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let mut last = (0, 0);
        for k in 0..5 {
            let h = 0.4 / 2f64.powi(k);
            let opts = CountOptions::default().with_resolution(h);
            let now = (
                count_zeros(&cubic, &b1, &opts).unwrap().count(),
                count_zeros(&circle_line(), &b2, &opts).unwrap().count(),
            );
            assert!(now.0 >= last.0 && now.1 >= last.1, "{now:?} after {last:?}");
            last = now;
        }
        assert_eq!(last, (3, 2));
    }

    #[test]
    fn adapted_spacing_follows_the_correlation_length() {
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let bf = ProductOfIndependents::new(2, 2);
        assert_eq!(adapted_spacing(&bf, &bbox, 1.0 / 32.0, 8.0), 1.0 / 32.0);
        assert!((adapted_spacing(&bf, &bbox, 1.0, 8.0) - PI / 8.0).abs() < 1e-12);
        let grad = GradientModel::new(BargmannFock::new(2));
        let expected = PI / 3f64.sqrt() / 8.0;
        assert!((adapted_spacing(&grad, &bbox, 1.0, 8.0) - expected).abs() < 1e-12);
        assert!(
            (adapted_critical_spacing(&BargmannFock::new(2), &bbox, 1.0, 8.0) - expected).abs()
                < 1e-12
        );
    }

    #[test]
    fn path_and_pointwise_counts_agree() {
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let sampler = BfSampler::real(2, 2, &bbox, 1e-9, 2).unwrap();
        let opts = CountOptions::default();
        for i in 0..4 {
            let path = sampler.draw(17, i).unwrap();
            let a = count_path_zeros(&path, &bbox, &opts).unwrap();
            let b = count_zeros(&path, &bbox, &opts).unwrap();
            assert_eq!(a.count(), b.count());
            let c = count_path_critical_points(&path, 1, &bbox, &opts).unwrap();
            let e = count_critical_points(&path.component(1), &bbox, &opts).unwrap();
            assert_eq!(c.count(), e.count());
        }
    }

    #[test]
    fn stationary_critical_points_on_ten_units() {
        // Mean number of critical points of φ on [0, 10] is 10√3/π.
        let bbox = BoxDomain::cube(1, 0.0, 10.0).unwrap();
        let sampler = BfSampler::real(1, 1, &bbox, 1e-9, 2).unwrap();
        let n = 2000;
        let counts: Vec<f64> = (0..n)
            .map(|i| {
                let path = sampler.draw(5, i).unwrap();
                count_path_critical_points(&path, 0, &bbox, &CountOptions::default())
                    .unwrap()
                    .count() as f64
            })
            .collect();
        let stats = crate::stats::SampleStats::from_slice(&counts);
        let expected = 10.0 * 3f64.sqrt() / PI;
        assert!(
            (stats.mean - expected).abs() < 3.0 * stats.stderr(),
            "{} ± {}",
            stats.mean,
            stats.stderr()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn reported_zeros_are_separated_with_small_residuals(seed in 0u64..10_000) {
            let mut r = crate::rng::stream(seed, 0);
            let quad = |r: &mut crate::rng::StreamRng| {
                let mut c = vec![0.0; 6];
                crate::rng::fill_standard_normal(r, &mut c);
                Polynomial::from_coeffs(2, 2, c).unwrap()
            };
            let f = PolyVectorField::new(vec![quad(&mut r), quad(&mut r)]).unwrap();
            let bbox = BoxDomain::cube(2, -1.5, 1.5).unwrap();
            let opts = CountOptions::default().with_resolution(1.0 / 16.0);
            let z = count_zeros(&f, &bbox, &opts).unwrap();
            prop_assert!(z.count() <= 4);
            let radius = opts.dedupe_radius(&bbox);
            for (i, p) in z.points.iter().enumerate() {
                prop_assert!(z.residuals[i] <= 1e-10 * (1.0 + z.field_scale));
                prop_assert!(bbox.contains(p));
                for q in &z.points[..i] {
                    prop_assert!(distance(p, q) > radius);
                }
            }
        }
    }
}
