use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::polyalg::MultiIndex;

use super::kernel::{bf_kernel_derivatives, holomorphic_kernel_derivatives};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    BargmannFockReal,
    BargmannFockComplex,
    ProductOfIndependents,
    CustomKernel,
}

/// The linear functional `F ↦ ∂^α F_c(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub point: Vec<f64>,
    pub alpha: MultiIndex,
    pub component: usize,
}

impl Site {
    pub fn new(point: Vec<f64>, alpha: MultiIndex, component: usize) -> Self {
        Site {
            point,
            alpha,
            component,
        }
    }
}

/// A centred Gaussian field `F: R^d → R^{d'}` described by the covariances
/// of its derivatives.
pub trait GaussianFieldModel: Send + Sync {
    /// Real dimension of the domain.
    fn dim(&self) -> usize;

    /// Number of real components.
    fn codim(&self) -> usize;

    fn kind(&self) -> ModelKind;

    /// Largest `|α|` for which [`covariance`](Self::covariance) is valid.
    fn max_order(&self) -> usize;

    /// `Cov(∂^α F_c(x), ∂^β F_e(y))`.
    fn covariance(&self, a: &Site, b: &Site) -> f64;

    /// True when the components are the partial derivatives of a single
    /// scalar field rather than independent fields.
    fn is_gradient(&self) -> bool {
        false
    }

    /// Covariance matrix of a family of sites.
    fn covariance_matrix(&self, sites: &[Site]) -> DMatrix<f64> {
        let n = sites.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.covariance(&sites[i], &sites[j]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Cross-covariance `Cov(a_i, b_j)`.
    fn cross_covariance(&self, a: &[Site], b: &[Site]) -> DMatrix<f64> {
        DMatrix::from_fn(a.len(), b.len(), |i, j| self.covariance(&a[i], &b[j]))
    }
}

/// The real Bargmann–Fock field `φ(x) = ψ(x) e^{-|x|²/2}` with covariance
/// `e^{-|x-y|²/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BargmannFock {
    dim: usize,
}

impl BargmannFock {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        BargmannFock { dim }
    }
}

impl GaussianFieldModel for BargmannFock {
    fn dim(&self) -> usize {
        self.dim
    }
    fn codim(&self) -> usize {
        1
    }
    fn kind(&self) -> ModelKind {
        ModelKind::BargmannFockReal
    }
    fn max_order(&self) -> usize {
        usize::MAX
    }
    fn covariance(&self, a: &Site, b: &Site) -> f64 {
        bf_kernel_derivatives(&a.alpha, &b.alpha, &a.point, &b.point)
    }
}

/// `codim` independent copies of the real Bargmann–Fock field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductOfIndependents {
    dim: usize,
    codim: usize,
}

impl ProductOfIndependents {
    pub fn new(dim: usize, codim: usize) -> Self {
        assert!(dim >= 1 && codim >= 1);
        ProductOfIndependents { dim, codim }
    }
}

impl GaussianFieldModel for ProductOfIndependents {
    fn dim(&self) -> usize {
        self.dim
    }
    fn codim(&self) -> usize {
        self.codim
    }
    fn kind(&self) -> ModelKind {
        ModelKind::ProductOfIndependents
    }
    fn max_order(&self) -> usize {
        usize::MAX
    }
    fn covariance(&self, a: &Site, b: &Site) -> f64 {
        if a.component != b.component {
            return 0.0;
        }
        bf_kernel_derivatives(&a.alpha, &b.alpha, &a.point, &b.point)
    }
}

/// `F = ∇f` for a scalar model `f`; one derivative order is consumed.
#[derive(Clone, Debug)]
pub struct GradientModel<M> {
    inner: M,
}

impl<M: GaussianFieldModel> GradientModel<M> {
    pub fn new(inner: M) -> Self {
        assert_eq!(inner.codim(), 1, "gradient model needs a scalar field");
        GradientModel { inner }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: GaussianFieldModel> GaussianFieldModel for GradientModel<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn codim(&self) -> usize {
        self.inner.dim()
    }
    fn kind(&self) -> ModelKind {
        self.inner.kind()
    }
    fn max_order(&self) -> usize {
        self.inner.max_order().saturating_sub(1)
    }
    fn is_gradient(&self) -> bool {
        true
    }
    fn covariance(&self, a: &Site, b: &Site) -> f64 {
        let sa = Site {
            point: a.point.clone(),
            alpha: a.alpha.with_increment(a.component),
            component: 0,
        };
        let sb = Site {
            point: b.point.clone(),
            alpha: b.alpha.with_increment(b.component),
            component: 0,
        };
        self.inner.covariance(&sa, &sb)
    }
}

/// Scalar kernel with analytic mixed partials `(α, β, x, y) ↦ ∂_x^α ∂_y^β K(x, y)`.
pub type KernelFn = dyn Fn(&MultiIndex, &MultiIndex, &[f64], &[f64]) -> f64 + Send + Sync;

/// `codim` independent copies of a field with a user-supplied kernel.
#[derive(Clone)]
pub struct CustomKernel {
    dim: usize,
    codim: usize,
    max_order: usize,
    kernel: Arc<KernelFn>,
}

impl CustomKernel {
    pub fn new(dim: usize, codim: usize, max_order: usize, kernel: Arc<KernelFn>) -> Self {
        CustomKernel {
            dim,
            codim,
            max_order,
            kernel,
        }
    }
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("dim", &self.dim)
            .field("codim", &self.codim)
            .field("max_order", &self.max_order)
            .finish_non_exhaustive()
    }
}

impl GaussianFieldModel for CustomKernel {
    fn dim(&self) -> usize {
        self.dim
    }
    fn codim(&self) -> usize {
        self.codim
    }
    fn kind(&self) -> ModelKind {
        ModelKind::CustomKernel
    }
    fn max_order(&self) -> usize {
        self.max_order
    }
    fn covariance(&self, a: &Site, b: &Site) -> f64 {
        if a.component != b.component {
            return 0.0;
        }
        (self.kernel)(&a.alpha, &b.alpha, &a.point, &b.point)
    }
}

/// `copies` independent holomorphic series `ψ_C(z) = Σ γ_α z^α/√α!` with
/// `E|γ_α|² = 1`, realified: the domain is `R^{2d}` with coordinates
/// `(Re z, Im z)` and component `2c` (`2c+1`) is `Re ψ_c` (`Im ψ_c`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexBargmannFock {
    complex_dim: usize,
    copies: usize,
}

impl ComplexBargmannFock {
    pub fn new(complex_dim: usize, copies: usize) -> Self {
        assert!(complex_dim >= 1 && copies >= 1);
        ComplexBargmannFock {
            complex_dim,
            copies,
        }
    }

    pub fn complex_dim(&self) -> usize {
        self.complex_dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    /// `(z, complex order, i^{|b|})` for a real site `∂_x^a ∂_y^b`.
    fn complexify(&self, s: &Site) -> (Vec<Complex64>, MultiIndex, Complex64) {
        let d = self.complex_dim;
        let z = (0..d)
            .map(|j| Complex64::new(s.point[j], s.point[d + j]))
            .collect();
        let e = s.alpha.exponents();
        let merged = MultiIndex::new((0..d).map(|j| e[j] + e[d + j]).collect());
        let ib: u32 = e[d..].iter().sum();
        (z, merged, Complex64::i().powu(ib))
    }
}

impl GaussianFieldModel for ComplexBargmannFock {
    fn dim(&self) -> usize {
        2 * self.complex_dim
    }
    fn codim(&self) -> usize {
        2 * self.copies
    }
    fn kind(&self) -> ModelKind {
        ModelKind::BargmannFockComplex
    }
    fn max_order(&self) -> usize {
        usize::MAX
    }
    fn covariance(&self, a: &Site, b: &Site) -> f64 {
        if a.component / 2 != b.component / 2 {
            return 0.0;
        }
        let (z, ma, pa) = self.complexify(a);
        let (w, mb, pb) = self.complexify(b);
        // E[X conj(Y)] for X = pa ψ^{(ma)}(z), Y = pb ψ^{(mb)}(w); E[XY] = 0.
        let h = pa * pb.conj() * holomorphic_kernel_derivatives(&ma, &mb, &z, &w);
        match (a.component % 2, b.component % 2) {
            (0, 0) | (1, 1) => 0.5 * h.re,
            (1, 0) => 0.5 * h.im,
            _ => -0.5 * h.im,
        }
    }
}
