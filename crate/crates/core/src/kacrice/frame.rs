use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kergin::PointConfiguration;
use crate::linalg::{det, gram_schmidt_rows, kernel_projector};
use crate::polyalg::{PolySpace, PolyVectorField, SpaceKind};
use crate::rng::{self, fill_standard_normal};
use crate::stats::SampleStats;

/// Relative residual below which an evaluation functional is considered
/// dependent on the previous ones during Gram–Schmidt.
pub const FRAME_RANK_TOL: f64 = 1e-10;

/// Interpolation spaces `V ⊃ V_0` for `p`-point configurations.
#[derive(Clone, Debug)]
pub struct SpacePair {
    pub v: PolySpace,
    pub v0: PolySpace,
}

impl SpacePair {
    /// `V = (P_p^d)^d`, `V_0 = (P_{p-1}^d)^d`.
    pub fn vector(dim: usize, p: usize) -> Self {
        assert!(p >= 1);
        SpacePair {
            v: PolySpace::full(dim, p),
            v0: PolySpace::full(dim, p - 1),
        }
    }

    /// `V = ∇P_{p+1}^d`, `V_0 = ∇P_p^d`.
    pub fn gradient(dim: usize, p: usize) -> Self {
        assert!(p >= 1);
        SpacePair {
            v: PolySpace::gradient(dim, p),
            v0: PolySpace::gradient(dim, p - 1),
        }
    }

    pub fn new(kind: SpaceKind, dim: usize, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("p must be at least 1".into()));
        }
        match kind {
            SpaceKind::Full => Ok(Self::vector(dim, p)),
            SpaceKind::Gradient => Ok(Self::gradient(dim, p)),
            SpaceKind::FullComplex | SpaceKind::GradientComplex => Err(Error::Unsupported(
                "factorisation over complex interpolation spaces",
            )),
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.v.kind()
    }

    /// Number of points `p` the pair is built for.
    pub fn p(&self) -> usize {
        self.v.degree()
    }

    pub fn ambient_dim(&self) -> usize {
        self.v.ambient_dim()
    }
}

/// Evaluation functionals `δ_y` on `V_0` in an orthonormal basis, with their
/// Gram–Schmidt factorisation `E = A·D`.
///
/// Row `k·d + c` of `E` is the functional `G ↦ G_c(y_k)`.
#[derive(Clone, Debug)]
pub struct EvaluationFrame {
    pub config: PointConfiguration,
    pub e: DMatrix<f64>,
    /// Lower triangular with positive diagonal.
    pub a: DMatrix<f64>,
    /// Orthonormal rows.
    pub d: DMatrix<f64>,
    pub det_a: f64,
}

/// Stacked evaluation matrix `(dp × dim)` of a space at the points.
pub(crate) fn stacked_evaluation(
    space: &PolySpace,
    config: &PointConfiguration,
) -> Result<DMatrix<f64>> {
    let d = space.ambient_dim();
    if config.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: config.dim(),
        });
    }
    let p = config.len();
    let mut e = DMatrix::zeros(d * p, space.dim());
    for (k, y) in config.points().iter().enumerate() {
        let block = space.eval_matrix(y)?;
        e.view_mut((k * d, 0), (d, space.dim())).copy_from(&block);
    }
    Ok(e)
}

fn check_real(space: &PolySpace) -> Result<()> {
    if space.kind().is_complex() {
        return Err(Error::Unsupported("complex interpolation spaces"));
    }
    Ok(())
}

pub fn evaluation_frame(v0: &PolySpace, config: &PointConfiguration) -> Result<EvaluationFrame> {
    check_real(v0)?;
    if config.on_diagonal() {
        return Err(Error::DiagonalDegeneracy("two points coincide".into()));
    }
    let e = stacked_evaluation(v0, config)?;
    let gs = gram_schmidt_rows(&e, FRAME_RANK_TOL)?;
    let det_a = gs.lower.diagonal().iter().product();
    Ok(EvaluationFrame {
        config: config.clone(),
        e,
        a: gs.lower,
        d: gs.orthonormal,
        det_a,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaOptions {
    /// Monte Carlo sample size for the Gaussian L² norm.
    pub samples: usize,
    pub seed: u64,
    /// Factor `c²` multiplying the inner product of `V`.
    pub inner_product_scale: f64,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        LambdaOptions {
            samples: 4096,
            seed: 0x1a4b_da00,
            inner_product_scale: 1.0,
        }
    }
}

/// `J_{y_k} ∘ Proj_{Ker δ_y}` on `V`, normalised by its norm `λ_y^k`.
///
/// The norm is the L² norm under the standard Gaussian measure of `V`,
/// estimated by fixed-seed Monte Carlo.
#[derive(Clone, Debug)]
pub struct JacobianFunctional {
    k: usize,
    dim: usize,
    /// `B_k P`: orthonormal coordinates on `V` to the flattened Jacobian at
    /// `y_k` of the projection onto `Ker δ_y` (row `i·d + v` is `∂_v G_i`).
    map: DMatrix<f64>,
    lambda: f64,
    lambda_se: f64,
}

impl JacobianFunctional {
    /// One-based point index.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Standard error of the Monte Carlo estimate of `λ`.
    pub fn lambda_se(&self) -> f64 {
        self.lambda_se
    }

    /// `(d² × dim V)` map from coordinates to the projected Jacobian.
    pub fn map(&self) -> &DMatrix<f64> {
        &self.map
    }

    /// `J_{y_k}(Proj G)` for `G` given by its orthonormal coordinates.
    pub fn projected_jacobian_det(&self, coords: &DVector<f64>) -> f64 {
        let m = &self.map * coords;
        det(m.as_slice(), self.dim)
    }

    /// `h_y^k(G) = J_{y_k}(Proj G) / λ_y^k`.
    pub fn h(&self, coords: &DVector<f64>) -> f64 {
        self.projected_jacobian_det(coords) / self.lambda
    }

    /// `h_y^k` on a field of `V`.
    pub fn h_field(&self, space: &PolySpace, g: &PolyVectorField<f64>) -> Result<f64> {
        Ok(self.h(&space.coordinates(g)?))
    }
}

/// Builds `h_y^k` for the one-based index `k`.
pub fn jacobian_functional(
    v: &PolySpace,
    config: &PointConfiguration,
    k: usize,
    opts: &LambdaOptions,
) -> Result<JacobianFunctional> {
    check_real(v)?;
    if k == 0 || k > config.len() {
        return Err(Error::InvalidArgument(format!(
            "point index {k} outside 1..={}",
            config.len()
        )));
    }
    if opts.samples < 2 {
        return Err(Error::InvalidArgument(
            "λ needs at least two samples".into(),
        ));
    }
    if !(opts.inner_product_scale > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "inner product scale must be positive, got {}",
            opts.inner_product_scale
        )));
    }
    let d = v.ambient_dim();
    let e = stacked_evaluation(v, config)?;
    let proj = kernel_projector(&e, FRAME_RANK_TOL)?;
    let map = v.jacobian_matrix(config.point(k - 1))? * proj;
    // A standard Gaussian for the scaled inner product has coordinates ξ/c
    // in the original orthonormal basis.
    let coord_scale = 1.0 / opts.inner_product_scale.sqrt();
    let mut r = rng::stream(opts.seed, 0);
    let mut xi = vec![0.0; v.dim()];
    let mut stats = SampleStats::new();
    for _ in 0..opts.samples {
        fill_standard_normal(&mut r, &mut xi);
        let m = &map * DVector::from_iterator(xi.len(), xi.iter().map(|x| x * coord_scale));
        let j = det(m.as_slice(), d);
        stats.push(j * j);
    }
    let lambda = stats.mean.sqrt();
    let reference = (map.norm() * coord_scale).powi(d as i32);
    if !(lambda > 1e-12 * reference) {
        return Err(Error::VanishingJacobianFunctional { k });
    }
    let lambda_se = stats.stderr() / (2.0 * lambda);
    Ok(JacobianFunctional {
        k,
        dim: d,
        map,
        lambda,
        lambda_se,
    })
}

/// `λ_y^k = ‖J_{y_k} ∘ Proj_{Ker δ_y}‖` for the one-based index `k`.
pub fn lambda_norm(
    v: &PolySpace,
    config: &PointConfiguration,
    k: usize,
    opts: &LambdaOptions,
) -> Result<f64> {
    Ok(jacobian_functional(v, config, k, opts)?.lambda())
}
