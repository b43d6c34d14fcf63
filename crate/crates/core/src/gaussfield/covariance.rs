use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kergin::PointConfiguration;
use crate::linalg::{check_psd, min_eigenvalue, symmetrize};
use crate::polyalg::{enumerate_multiindices, MultiIndex};

use super::model::{GaussianFieldModel, Site};

/// Eigenvalue slack, relative to the trace, tolerated in PSD checks.
pub const PSD_SLACK: f64 = 1e-10;

/// Smallest eigenvalue of a unit-diagonal-scaled constrained block below
/// which conditioning is refused.
pub const SINGULAR_CONSTRAINT_TOL: f64 = 1e-12;

/// One entry of a jet vector: `∂^α F_c(y_point)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetIndex {
    pub point: usize,
    pub alpha: MultiIndex,
    pub component: usize,
}

/// Covariance of all derivatives `∂^α F_c(y_k)` with `|α| ≤ order`,
/// ordered point-major, then by `α` in graded order, then by component.
#[derive(Clone, Debug)]
pub struct JetCovariance {
    pub index: Vec<JetIndex>,
    pub matrix: DMatrix<f64>,
}

impl JetCovariance {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Positions of the entries with the given derivative order.
    pub fn positions_of_order(&self, order: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.index[i].alpha.order() == order)
            .collect()
    }
}

pub fn jet_covariance<M: GaussianFieldModel + ?Sized>(
    model: &M,
    config: &PointConfiguration<f64>,
    order: usize,
) -> Result<JetCovariance> {
    if order > model.max_order() {
        return Err(Error::JetOrderTooLow {
            required: order,
            available: model.max_order(),
        });
    }
    if config.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: config.dim(),
        });
    }
    let alphas = enumerate_multiindices(model.dim(), order);
    let mut index = Vec::new();
    let mut sites = Vec::new();
    for (k, y) in config.points().iter().enumerate() {
        for alpha in &alphas {
            for c in 0..model.codim() {
                index.push(JetIndex {
                    point: k,
                    alpha: alpha.clone(),
                    component: c,
                });
                sites.push(Site::new(y.clone(), alpha.clone(), c));
            }
        }
    }
    let matrix = model.covariance_matrix(&sites);
    check_psd(&matrix, PSD_SLACK)?;
    Ok(JetCovariance { index, matrix })
}

/// A Gaussian vector, some coordinates of which may have been fixed by
/// conditioning.
#[derive(Clone, Debug)]
pub struct ConditionalGaussian {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// Indices fixed so far, with their values.
    pub constraints: Vec<(usize, f64)>,
}

impl ConditionalGaussian {
    pub fn centered(covariance: DMatrix<f64>) -> Self {
        let n = covariance.nrows();
        ConditionalGaussian {
            mean: DVector::zeros(n),
            covariance,
            constraints: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Law given `X_{idx[i]} = values[i]` (Schur complement). Indices
    /// already fixed to the same value are skipped.
    pub fn condition(&self, idx: &[usize], values: &[f64]) -> Result<ConditionalGaussian> {
        if idx.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: idx.len(),
                found: values.len(),
            });
        }
        let n = self.len();
        let mut active = Vec::new();
        let mut active_values = Vec::new();
        for (&i, &v) in idx.iter().zip(values) {
            if i >= n {
                return Err(Error::InvalidArgument(format!(
                    "index {i} out of range for a vector of length {n}"
                )));
            }
            match self.constraints.iter().find(|(j, _)| *j == i) {
                Some(&(_, old)) if (old - v).abs() <= 1e-12 * (1.0 + v.abs()) => {}
                Some(_) => return Err(Error::ConstraintConflict { index: i }),
                None => {
                    if active.contains(&i) {
                        return Err(Error::ConstraintConflict { index: i });
                    }
                    active.push(i);
                    active_values.push(v);
                }
            }
        }
        if active.is_empty() {
            return Ok(self.clone());
        }
        let m = active.len();
        let scc = DMatrix::from_fn(m, m, |a, b| self.covariance[(active[a], active[b])]);
        let scale: Vec<f64> = (0..m).map(|a| scc[(a, a)].max(0.0).sqrt()).collect();
        if scale.contains(&0.0) {
            return Err(Error::SingularConstraint {
                min_eigenvalue: 0.0,
            });
        }
        let scaled = DMatrix::from_fn(m, m, |a, b| scc[(a, b)] / (scale[a] * scale[b]));
        let min_eig = min_eigenvalue(&scaled);
        if min_eig <= SINGULAR_CONSTRAINT_TOL {
            return Err(Error::SingularConstraint {
                min_eigenvalue: min_eig,
            });
        }
        let chol = scaled.cholesky().ok_or(Error::SingularConstraint {
            min_eigenvalue: min_eig,
        })?;
        // Σ_{·c} Σ_cc^{-1} via the scaled factorisation.
        let sxc = DMatrix::from_fn(n, m, |i, a| self.covariance[(i, active[a])] / scale[a]);
        let resid = DVector::from_fn(m, |a, _| {
            (active_values[a] - self.mean[active[a]]) / scale[a]
        });
        let gain_t = chol.solve(&sxc.transpose());
        let mut mean = &self.mean + gain_t.transpose() * resid;
        let mut cov = &self.covariance - sxc * gain_t;
        symmetrize(&mut cov);
        let mut constraints = self.constraints.clone();
        for (a, &i) in active.iter().enumerate() {
            mean[i] = active_values[a];
            for j in 0..n {
                cov[(i, j)] = 0.0;
                cov[(j, i)] = 0.0;
            }
            constraints.push((i, active_values[a]));
        }
        for &(i, v) in &self.constraints {
            mean[i] = v;
        }
        Ok(ConditionalGaussian {
            mean,
            covariance: cov,
            constraints,
        })
    }

    /// Mean and covariance of the coordinates `idx`.
    pub fn marginal(&self, idx: &[usize]) -> (DVector<f64>, DMatrix<f64>) {
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |a, b| {
            self.covariance[(idx[a], idx[b])]
        });
        (mean, cov)
    }
}

/// Conditions the centred jet vector on `X_idx = values`.
pub fn condition(
    jet: &JetCovariance,
    idx: &[usize],
    values: &[f64],
) -> Result<ConditionalGaussian> {
    ConditionalGaussian::centered(jet.matrix.clone()).condition(idx, values)
}

/// `(2π)^{-m/2} det(cov)^{-1/2}`.
pub fn gaussian_density_at_zero(cov: &DMatrix<f64>) -> Result<f64> {
    Ok(log_gaussian_density_at_zero(cov)?.exp())
}

pub fn log_gaussian_density_at_zero(cov: &DMatrix<f64>) -> Result<f64> {
    let m = cov.nrows() as f64;
    let log_det = crate::linalg::spd_log_det(cov)?;
    Ok(-0.5 * m * (2.0 * std::f64::consts::PI).ln() - 0.5 * log_det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussfield::{BargmannFock, ProductOfIndependents};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        &a * a.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn single_point_jet_is_positive_definite() {
        for d in 1..=3 {
            let config = PointConfiguration::new(vec![vec![0.2; d]]).unwrap();
            let jet = jet_covariance(&BargmannFock::new(d), &config, 3).unwrap();
            assert!(min_eigenvalue(&jet.matrix) > 1e-6, "d={d}");
        }
    }

    #[test]
    fn coincident_points_are_rank_deficient() {
        let config = PointConfiguration::new(vec![vec![0.5], vec![0.5]]).unwrap();
        let jet = jet_covariance(&BargmannFock::new(1), &config, 0).unwrap();
        assert_eq!(jet.matrix, DMatrix::from_element(2, 2, 1.0));
        assert!(condition(&jet, &[0, 1], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn two_points_in_one_dimension() {
        let t = 0.8f64;
        let config = PointConfiguration::new(vec![vec![0.0], vec![t]]).unwrap();
        let jet = jet_covariance(&BargmannFock::new(1), &config, 0).unwrap();
        let r = (-0.5 * t * t).exp();
        assert!((jet.matrix[(0, 1)] - r).abs() < 1e-15 && jet.matrix[(0, 0)] == 1.0);
    }

    #[test]
    fn smallest_eigenvalue_shrinks_along_collapse() {
        let model = ProductOfIndependents::new(2, 2);
        let mut prev = f64::INFINITY;
        for j in 0..8 {
            let eps = 0.5f64.powi(j);
            let config =
                PointConfiguration::new(vec![vec![0.1, 0.1], vec![0.1 + eps, 0.1 - 0.5 * eps]])
                    .unwrap();
            let e = min_eigenvalue(&jet_covariance(&model, &config, 0).unwrap().matrix);
            assert!(e < prev && e > 0.0);
            prev = e;
        }
    }

    #[test]
    fn independent_blocks_are_untouched() {
        let mut cov = DMatrix::identity(3, 3);
        cov[(1, 2)] = 0.3;
        cov[(2, 1)] = 0.3;
        let g = ConditionalGaussian::centered(cov.clone())
            .condition(&[0], &[1.5])
            .unwrap();
        assert_eq!(g.covariance[(1, 1)], 1.0);
        assert_eq!(g.covariance[(1, 2)], 0.3);
        assert_eq!(g.mean[1], 0.0);
        assert_eq!(g.mean[0], 1.5);
    }

    #[test]
    fn textbook_bivariate_case() {
        let rho = 0.6;
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        let g = ConditionalGaussian::centered(cov)
            .condition(&[0], &[0.0])
            .unwrap();
        assert!((g.covariance[(1, 1)] - (1.0 - rho * rho)).abs() < 1e-15);
    }

    #[test]
    fn whole_vector_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cov = random_spd(&mut rng, 3);
        let g = ConditionalGaussian::centered(cov)
            .condition(&[0, 1, 2], &[0.1, -0.2, 0.3])
            .unwrap();
        assert_eq!(g.mean.as_slice(), &[0.1, -0.2, 0.3]);
        assert_eq!(g.covariance.amax(), 0.0);
    }

    #[test]
    fn conditioning_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cov = random_spd(&mut rng, 5);
        let g = ConditionalGaussian::centered(cov)
            .condition(&[1, 3], &[0.4, -1.0])
            .unwrap();
        let h = g.condition(&[3, 1], &[-1.0, 0.4]).unwrap();
        assert!((&g.mean - &h.mean).amax() < 1e-12);
        assert!((&g.covariance - &h.covariance).amax() < 1e-12);
        assert!(matches!(
            g.condition(&[1], &[0.0]),
            Err(Error::ConstraintConflict { index: 1 })
        ));
    }

    /// Conditional law by brute-force grid integration of the joint density
    /// over two free coordinates, with the other four fixed.
    #[test]
    fn conditioning_matches_grid_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cov = random_spd(&mut rng, 6);
        let fixed = [2usize, 3, 4, 5];
        let vals = [0.3, -0.2, 0.1, 0.5];
        let g = ConditionalGaussian::centered(cov.clone())
            .condition(&fixed, &vals)
            .unwrap();
        let prec = cov.clone().try_inverse().unwrap();
        let (n, lim) = (401, 8.0);
        let h = 2.0 * lim / (n - 1) as f64;
        let (mut z, mut m1, mut m2, mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let cond_sd = g.covariance[(0, 0)].sqrt().max(g.covariance[(1, 1)].sqrt());
        for i in 0..n {
            for j in 0..n {
                let a = g.mean[0] + cond_sd * (-lim + i as f64 * h);
                let b = g.mean[1] + cond_sd * (-lim + j as f64 * h);
                let x = DVector::from_vec(vec![a, b, vals[0], vals[1], vals[2], vals[3]]);
                let w = (-0.5 * (x.transpose() * &prec * &x)[0]).exp();
                z += w;
                m1 += w * a;
                m2 += w * b;
                s11 += w * a * a;
                s12 += w * a * b;
                s22 += w * b * b;
            }
        }
        let (m1, m2) = (m1 / z, m2 / z);
        assert!((m1 - g.mean[0]).abs() < 1e-3 && (m2 - g.mean[1]).abs() < 1e-3);
        assert!((s11 / z - m1 * m1 - g.covariance[(0, 0)]).abs() < 1e-3);
        assert!((s12 / z - m1 * m2 - g.covariance[(0, 1)]).abs() < 1e-3);
        assert!((s22 / z - m2 * m2 - g.covariance[(1, 1)]).abs() < 1e-3);
    }

    #[test]
    fn density_at_zero() {
        let one = DMatrix::from_element(1, 1, 1.0);
        assert!(
            (gaussian_density_at_zero(&one).unwrap() - 1.0 / (2.0 * std::f64::consts::PI).sqrt())
                .abs()
                < 1e-15
        );
        let s2 = 0.7;
        let m = DMatrix::identity(3, 3) * s2;
        let want = (2.0 * std::f64::consts::PI * s2).powf(-1.5);
        assert!((gaussian_density_at_zero(&m).unwrap() - want).abs() < 1e-14);
        assert!(gaussian_density_at_zero(&DMatrix::from_element(2, 2, 1.0)).is_err());
    }

    /// Box-kernel density estimate at 0 from Monte Carlo draws. The box
    /// average of the density is `ψ(0)(1 - tr(Σ^{-1}) h²/24 + O(h⁴))`.
    #[test]
    fn density_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-0.5..0.5));
        let cov = &a * a.transpose() + DMatrix::identity(4, 4) * 0.5;
        let l = cov.clone().cholesky().unwrap().l();
        let h = 0.3;
        let n = 20_000_000;
        let mut hits = 0usize;
        let mut z = DVector::zeros(4);
        let mut s = crate::rng::stream(8, 0);
        for _ in 0..n {
            crate::rng::fill_standard_normal(&mut s, z.as_mut_slice());
            let x = &l * &z;
            if x.iter().all(|v| v.abs() < 0.5 * h) {
                hits += 1;
            }
        }
        let est = hits as f64 / n as f64 / h.powi(4);
        let trace_prec = cov.clone().try_inverse().unwrap().trace();
        let exact = gaussian_density_at_zero(&cov).unwrap() * (1.0 - trace_prec * h * h / 24.0);
        assert!((est - exact).abs() < 0.05 * exact, "{est} vs {exact}");
    }
}
