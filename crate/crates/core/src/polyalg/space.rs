use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::multiindex::{enumerate_multiindices, factorial, MultiIndex};
use super::{PolyVectorField, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    /// `(P_p^d)^d`.
    Full,
    /// `∇P_{p+1}^d`.
    Gradient,
    FullComplex,
    GradientComplex,
}

impl SpaceKind {
    pub fn is_complex(self) -> bool {
        matches!(self, SpaceKind::FullComplex | SpaceKind::GradientComplex)
    }

    pub fn is_gradient(self) -> bool {
        matches!(self, SpaceKind::Gradient | SpaceKind::GradientComplex)
    }
}

/// Bombieri weight `α!(P-|α|)!/P!` of `x^α` among polynomials of degree `≤ P`.
pub fn bombieri_weight(alpha: &MultiIndex, degree_bound: usize) -> f64 {
    let n = alpha.order();
    assert!(n <= degree_bound);
    alpha.factorial() * factorial(degree_bound - n) / factorial(degree_bound)
}

/// Bombieri inner product `Σ_α w(α) p_α conj(q_α)` with degree bound
/// `degree_bound` (which must dominate both degrees).
pub fn bombieri_inner<T: Scalar>(p: &Polynomial<T>, q: &Polynomial<T>, degree_bound: usize) -> T {
    assert_eq!(p.dim(), q.dim());
    assert!(p.degree() <= degree_bound && q.degree() <= degree_bound);
    let mut acc = T::zero();
    for ((alpha, a), b) in p.terms().zip(q.coeffs()) {
        if a != T::zero() && *b != T::zero() {
            acc += a * b.conj() * T::from_f64(bombieri_weight(&alpha, degree_bound));
        }
    }
    acc
}

/// A finite-dimensional space of polynomial vector fields on `R^d` (or
/// `C^d`) with the componentwise Bombieri inner product.
///
/// The stored basis is real and orthonormal; complex kinds use the same
/// basis over `C`.
#[derive(Clone, Debug)]
pub struct PolySpace {
    kind: SpaceKind,
    dim: usize,
    degree: usize,
    /// Degree bound of each component, the `P` in the Bombieri weight.
    component_degree: usize,
    basis: Vec<PolyVectorField<f64>>,
    gram: DMatrix<f64>,
}

impl PolySpace {
    /// `(P_p^d)^d`, basis `x^α e_c / ‖x^α‖` ordered component-major.
    pub fn full(dim: usize, degree: usize) -> Self {
        Self::build(SpaceKind::Full, dim, degree)
    }

    /// `∇P_{p+1}^d`, basis `∇x^α / ‖∇x^α‖` for `1 ≤ |α| ≤ p+1`.
    pub fn gradient(dim: usize, degree: usize) -> Self {
        Self::build(SpaceKind::Gradient, dim, degree)
    }

    pub fn new(kind: SpaceKind, dim: usize, degree: usize) -> Self {
        Self::build(kind, dim, degree)
    }

    fn build(kind: SpaceKind, dim: usize, degree: usize) -> Self {
        assert!(dim >= 1);
        let basis: Vec<PolyVectorField<f64>> = if kind.is_gradient() {
            enumerate_multiindices(dim, degree + 1)
                .into_iter()
                .filter(|a| !a.is_zero())
                .map(|a| {
                    let g = PolyVectorField::from_gradient(&Polynomial::monomial(&a, 1.0));
                    let comps = g
                        .into_components()
                        .into_iter()
                        .map(|c| c.with_degree(degree).unwrap())
                        .collect();
                    PolyVectorField::new(comps).unwrap()
                })
                .collect()
        } else {
            let monos = enumerate_multiindices(dim, degree);
            (0..dim)
                .flat_map(|c| monos.iter().map(move |a| (c, a)))
                .map(|(c, a)| {
                    let mut comps = vec![Polynomial::zero(dim, degree); dim];
                    comps[c] = Polynomial::monomial(a, 1.0).with_degree(degree).unwrap();
                    PolyVectorField::new(comps).unwrap()
                })
                .collect()
        };
        let basis: Vec<_> = basis
            .into_iter()
            .map(|b| {
                let norm = field_inner(&b, &b, degree).sqrt();
                PolyVectorField::new(b.components().iter().map(|c| c.scale(1.0 / norm)).collect())
                    .unwrap()
            })
            .collect();
        let n = basis.len();
        let gram = DMatrix::from_fn(n, n, |i, j| field_inner(&basis[i], &basis[j], degree));
        PolySpace {
            kind,
            dim,
            degree,
            component_degree: degree,
            basis,
            gram,
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Number of variables `d`.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Length of the basis (complex dimension for complex kinds).
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Dimension over `R`.
    pub fn real_dim(&self) -> usize {
        if self.kind.is_complex() {
            2 * self.dim()
        } else {
            self.dim()
        }
    }

    pub fn basis(&self) -> &[PolyVectorField<f64>] {
        &self.basis
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// The inner product of the space.
    pub fn inner<T: Scalar>(&self, a: &PolyVectorField<T>, b: &PolyVectorField<T>) -> T {
        field_inner(a, b, self.component_degree)
    }

    /// Orthonormal coordinates of the orthogonal projection of `g` onto the
    /// space.
    pub fn coordinates<T: Scalar>(&self, g: &PolyVectorField<T>) -> Result<DVector<T>> {
        self.check_field(g)?;
        let g = self.fit_degree(g)?;
        Ok(DVector::from_iterator(
            self.dim(),
            self.basis
                .iter()
                .map(|b| field_inner(&g, &lift(b), self.component_degree)),
        ))
    }

    /// Bombieri distance from `g` to the space; zero iff `g` belongs to it.
    pub fn membership_residual<T: Scalar>(&self, g: &PolyVectorField<T>) -> Result<f64> {
        let c = self.coordinates(g)?;
        let back = self.from_coordinates(c.as_slice())?;
        let g = self.fit_degree(g)?;
        let diff = PolyVectorField::new(
            g.components()
                .iter()
                .zip(back.components())
                .map(|(a, b)| a.sub(b))
                .collect(),
        )?;
        Ok(field_inner(&diff, &diff, self.component_degree)
            .re()
            .max(0.0)
            .sqrt())
    }

    pub fn from_coordinates<T: Scalar>(&self, coords: &[T]) -> Result<PolyVectorField<T>> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        let mut comps = vec![Polynomial::<T>::zero(self.dim, self.degree); self.dim];
        for (b, &c) in self.basis.iter().zip(coords) {
            if c == T::zero() {
                continue;
            }
            for (out, bc) in comps.iter_mut().zip(b.components()) {
                for (o, &v) in out.coeffs_mut().iter_mut().zip(bc.coeffs()) {
                    *o += c * T::from_f64(v);
                }
            }
        }
        PolyVectorField::new(comps)
    }

    /// `(d × dim)` matrix whose column `j` is the basis field `j` at `x`.
    pub fn eval_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.dim, self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            for (i, v) in b.eval(x)?.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    /// `(d² × dim)` matrix whose column `j` holds `∂_v G_{j,i}(x)` at row
    /// `i·d + v`.
    pub fn jacobian_matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let mut m = DMatrix::zeros(d * d, self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            let jac = b.jacobian(x)?;
            for i in 0..d {
                for v in 0..d {
                    m[(i * d + v, j)] = jac[(i, v)];
                }
            }
        }
        Ok(m)
    }

    fn check_field<T: Scalar>(&self, g: &PolyVectorField<T>) -> Result<()> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: g.dim(),
            });
        }
        if g.codim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: g.codim(),
            });
        }
        if self.kind.is_complex() && !T::IS_COMPLEX {
            return Err(Error::Unsupported("real field in a complex space"));
        }
        Ok(())
    }

    fn fit_degree<T: Scalar>(&self, g: &PolyVectorField<T>) -> Result<PolyVectorField<T>> {
        if g.degree() == self.degree {
            return Ok(g.clone());
        }
        let comps = g
            .components()
            .iter()
            .map(|c| {
                if c.effective_degree() > self.degree {
                    // Terms above the space degree are orthogonal to it.
                    let mut t = Polynomial::zero(self.dim, self.degree);
                    let n = t.coeffs().len();
                    t.coeffs_mut().copy_from_slice(&c.coeffs()[..n]);
                    Ok(t)
                } else {
                    c.with_degree(self.degree)
                }
            })
            .collect::<Result<_>>()?;
        PolyVectorField::new(comps)
    }
}

fn field_inner<T: Scalar>(
    a: &PolyVectorField<T>,
    b: &PolyVectorField<T>,
    degree_bound: usize,
) -> T {
    a.components()
        .iter()
        .zip(b.components())
        .map(|(p, q)| bombieri_inner(p, q, degree_bound))
        .fold(T::zero(), |x, y| x + y)
}

fn lift<T: Scalar>(b: &PolyVectorField<f64>) -> PolyVectorField<T> {
    let comps = b
        .components()
        .iter()
        .map(|c| {
            Polynomial::from_coeffs(
                c.dim(),
                c.degree(),
                c.coeffs().iter().map(|&v| T::from_f64(v)).collect(),
            )
            .unwrap()
        })
        .collect();
    PolyVectorField::new(comps).unwrap()
}
