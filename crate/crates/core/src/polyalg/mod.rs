//! Multi-indices, dense polynomials, polynomial vector fields and the
//! polynomial spaces used as interpolation targets.

mod field;
mod json;
mod multiindex;
mod polynomial;
mod space;

pub use field::PolyVectorField;
pub use multiindex::{
    basis_len, binomial, enumerate_multiindices, factorial, homogeneous_multiindices, next_graded,
    MultiIndex,
};
pub use polynomial::Polynomial;
pub use space::{bombieri_inner, bombieri_weight, PolySpace, SpaceKind};

/// `det ∇G(x)`.
pub fn jacobian_det<T: crate::Scalar>(g: &PolyVectorField<T>, x: &[T]) -> crate::Result<T> {
    g.jacobian_det(x)
}
