use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

use super::Polynomial;

/// A map `R^d -> R^m` (or `C^d -> C^m`) with polynomial components sharing
/// one dimension and degree bound.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField<T = f64> {
    components: Vec<Polynomial<T>>,
}

impl<T: Scalar> PolyVectorField<T> {
    /// Builds a field, raising all components to the largest degree bound.
    pub fn new(components: Vec<Polynomial<T>>) -> Result<Self> {
        let first = components.first().ok_or_else(|| {
            Error::InvalidArgument("vector field needs at least one component".into())
        })?;
        let dim = first.dim();
        if let Some(bad) = components.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let degree = components.iter().map(|c| c.degree()).max().unwrap_or(0);
        let components = components
            .iter()
            .map(|c| c.with_degree(degree))
            .collect::<Result<_>>()?;
        Ok(PolyVectorField { components })
    }

    pub fn zero(dim: usize, codim: usize, degree: usize) -> Self {
        PolyVectorField {
            components: vec![Polynomial::zero(dim, degree); codim],
        }
    }

    /// `x ↦ x` on `R^d`.
    pub fn identity(dim: usize) -> Self {
        PolyVectorField {
            components: (0..dim).map(|i| Polynomial::variable(dim, i)).collect(),
        }
    }

    /// `∇f`, whose components have degree bound `deg f - 1`.
    pub fn from_gradient(f: &Polynomial<T>) -> Self {
        PolyVectorField {
            components: (0..f.dim()).map(|i| f.diff_var(i)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn codim(&self) -> usize {
        self.components.len()
    }

    pub fn degree(&self) -> usize {
        self.components[0].degree()
    }

    pub fn components(&self) -> &[Polynomial<T>] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Polynomial<T> {
        &self.components[i]
    }

    pub fn into_components(self) -> Vec<Polynomial<T>> {
        self.components
    }

    pub fn eval(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_point(x)?;
        Ok(self
            .components
            .iter()
            .map(|c| c.eval_unchecked(x))
            .collect())
    }

    /// Matrix of first partials, `J[(i, j)] = ∂_j G_i(x)`.
    pub fn jacobian(&self, x: &[T]) -> Result<DMatrix<T>> {
        self.check_point(x)?;
        let d = self.dim();
        let mut j = DMatrix::from_element(self.codim(), d, T::zero());
        for (i, c) in self.components.iter().enumerate() {
            for v in 0..d {
                j[(i, v)] = c.diff_var(v).eval_unchecked(x);
            }
        }
        Ok(j)
    }

    /// `det ∇G(x)`; requires as many components as variables.
    pub fn jacobian_det(&self, x: &[T]) -> Result<T> {
        if self.codim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: self.codim(),
            });
        }
        let j = self.jacobian(x)?;
        let n = self.dim();
        let rows: Vec<T> = (0..n)
            .flat_map(|i| (0..n).map(move |v| (i, v)))
            .map(|(i, v)| j[(i, v)])
            .collect();
        Ok(linalg::det_alternating(&rows, n))
    }

    /// Largest coefficient modulus of `∂_j G_i - ∂_i G_j` over all pairs;
    /// zero exactly when the field is a gradient.
    pub fn curl_residual(&self) -> f64 {
        let d = self.dim().min(self.codim());
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i + 1..d {
                let a = self.components[i].diff_var(j);
                let b = self.components[j].diff_var(i);
                worst = worst.max(a.max_coeff_diff(&b));
            }
        }
        worst
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_coeff_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn swap_components(&mut self, i: usize, j: usize) {
        self.components.swap(i, j);
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}
