use crate::polyalg::{basis_len, enumerate_multiindices, MultiIndex, PolyVectorField, Polynomial};
use crate::scalar::Scalar;

/// Access to the partial derivatives `∂^α f(x)` of a scalar function for
/// `|α| ≤ order()`.
///
/// Implementations must be safe for concurrent read-only evaluation.
pub trait Jet<T: Scalar>: Sync {
    fn dim(&self) -> usize;

    /// Largest derivative order available.
    fn order(&self) -> usize;

    /// All `∂^α f(x)` with `|α| ≤ order`, in graded order.
    fn jet(&self, x: &[T], order: usize) -> Vec<T>;

    fn derivative(&self, alpha: &MultiIndex, x: &[T]) -> T {
        self.jet(x, alpha.order())[alpha.rank()]
    }
}

/// Vector-valued counterpart of [`Jet`], one jet per component.
pub trait VectorJet<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn codim(&self) -> usize;
    fn order(&self) -> usize;

    /// `out[c]` holds the graded jet of component `c` up to `order`.
    fn jets(&self, x: &[T], order: usize) -> Vec<Vec<T>>;
}

impl<T: Scalar, J: Jet<T> + ?Sized> Jet<T> for &J {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn order(&self) -> usize {
        (**self).order()
    }

    fn jet(&self, x: &[T], order: usize) -> Vec<T> {
        (**self).jet(x, order)
    }

    fn derivative(&self, alpha: &MultiIndex, x: &[T]) -> T {
        (**self).derivative(alpha, x)
    }
}

impl<T: Scalar, J: VectorJet<T> + ?Sized> VectorJet<T> for &J {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn codim(&self) -> usize {
        (**self).codim()
    }

    fn order(&self) -> usize {
        (**self).order()
    }

    fn jets(&self, x: &[T], order: usize) -> Vec<Vec<T>> {
        (**self).jets(x, order)
    }
}

/// A jet given by a closure `(α, x) ↦ ∂^α f(x)`.
pub struct FnJet<F> {
    dim: usize,
    order: usize,
    f: F,
}

impl<F> FnJet<F> {
    pub fn new(dim: usize, order: usize, f: F) -> Self {
        FnJet { dim, order, f }
    }
}

impl<T: Scalar, F: Fn(&MultiIndex, &[T]) -> T + Sync> Jet<T> for FnJet<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn order(&self) -> usize {
        self.order
    }

    fn jet(&self, x: &[T], order: usize) -> Vec<T> {
        enumerate_multiindices(self.dim, order)
            .iter()
            .map(|a| (self.f)(a, x))
            .collect()
    }

    fn derivative(&self, alpha: &MultiIndex, x: &[T]) -> T {
        (self.f)(alpha, x)
    }
}

impl<T: Scalar> Jet<T> for Polynomial<T> {
    fn dim(&self) -> usize {
        Polynomial::dim(self)
    }

    fn order(&self) -> usize {
        usize::MAX
    }

    fn jet(&self, x: &[T], order: usize) -> Vec<T> {
        self.jet_unchecked(x, order)
    }

    fn derivative(&self, alpha: &MultiIndex, x: &[T]) -> T {
        self.diff(alpha).eval_unchecked(x)
    }
}

impl<T: Scalar> VectorJet<T> for PolyVectorField<T> {
    fn dim(&self) -> usize {
        PolyVectorField::dim(self)
    }

    fn codim(&self) -> usize {
        PolyVectorField::codim(self)
    }

    fn order(&self) -> usize {
        usize::MAX
    }

    fn jets(&self, x: &[T], order: usize) -> Vec<Vec<T>> {
        self.components().iter().map(|c| c.jet(x, order)).collect()
    }
}

/// Stacks scalar jets into a vector field.
pub struct Components<J>(pub Vec<J>);

impl<T: Scalar, J: Jet<T>> VectorJet<T> for Components<J> {
    fn dim(&self) -> usize {
        self.0[0].dim()
    }

    fn codim(&self) -> usize {
        self.0.len()
    }

    fn order(&self) -> usize {
        self.0.iter().map(|j| j.order()).min().unwrap_or(0)
    }

    fn jets(&self, x: &[T], order: usize) -> Vec<Vec<T>> {
        self.0.iter().map(|j| j.jet(x, order)).collect()
    }
}

/// The gradient field `∇f` of a scalar jet; loses one order.
pub struct Gradient<J>(pub J);

impl<T: Scalar, J: Jet<T>> VectorJet<T> for Gradient<J> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn codim(&self) -> usize {
        self.0.dim()
    }

    fn order(&self) -> usize {
        self.0.order().saturating_sub(1)
    }

    fn jets(&self, x: &[T], order: usize) -> Vec<Vec<T>> {
        let d = self.0.dim();
        let full = self.0.jet(x, order + 1);
        let alphas = enumerate_multiindices(d, order);
        (0..d)
            .map(|c| {
                alphas
                    .iter()
                    .map(|a| full[a.with_increment(c).rank()])
                    .collect()
            })
            .collect()
    }
}

/// Slice of a graded jet holding exactly the derivatives of order `r`,
/// listed like [`homogeneous_multiindices`](crate::polyalg::homogeneous_multiindices).
pub(crate) fn order_slice<T>(jet: &[T], dim: usize, r: usize) -> &[T] {
    let start = if r == 0 { 0 } else { basis_len(dim, r - 1) };
    &jet[start..basis_len(dim, r)]
}
