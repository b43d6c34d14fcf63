use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::multiindex::{basis_len, enumerate_multiindices, graded_rank, next_graded, MultiIndex};

/// Dense polynomial in `dim` variables of total degree at most `degree`.
///
/// Coefficients are stored in graded order (see
/// [`enumerate_multiindices`](super::enumerate_multiindices)); no coefficient
/// exists for `|α| > degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T = f64> {
    dim: usize,
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim >= 1);
        Polynomial {
            dim,
            degree,
            coeffs: vec![T::zero(); basis_len(dim, degree)],
        }
    }

    pub fn constant(dim: usize, degree: usize, c: T) -> Self {
        let mut p = Self::zero(dim, degree);
        p.coeffs[0] = c;
        p
    }

    /// `c · x^α`, stored with degree bound `|α|`.
    pub fn monomial(alpha: &MultiIndex, c: T) -> Self {
        let mut p = Self::zero(alpha.dim(), alpha.order());
        p.coeffs[alpha.rank()] = c;
        p
    }

    /// The coordinate function `x_i`.
    pub fn variable(dim: usize, i: usize) -> Self {
        Self::monomial(&MultiIndex::unit(dim, i), T::one())
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<T>) -> Result<Self> {
        let n = basis_len(dim, degree);
        if coeffs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: coeffs.len(),
            });
        }
        Ok(Polynomial {
            dim,
            degree,
            coeffs,
        })
    }

    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, T)>,
    {
        let mut p = Self::zero(dim, degree);
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: alpha.dim(),
                });
            }
            if alpha.order() > degree {
                return Err(Error::InvalidArgument(format!(
                    "term {alpha:?} exceeds degree {degree}"
                )));
            }
            p.coeffs[alpha.rank()] += c;
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degree bound of the representation.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Largest `|α|` with a nonzero coefficient (0 for the zero polynomial).
    pub fn effective_degree(&self) -> usize {
        self.terms()
            .filter(|(_, c)| *c != T::zero())
            .map(|(a, _)| a.order())
            .max()
            .unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> T {
        if alpha.order() > self.degree {
            return T::zero();
        }
        self.coeffs[alpha.rank()]
    }

    /// Iterates `(α, c_α)` in graded order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, T)> + '_ {
        let mut alpha = vec![0u32; self.dim];
        self.coeffs.iter().map(move |&c| {
            let a = MultiIndex::new(alpha.clone());
            next_graded(&mut alpha);
            (a, c)
        })
    }

    /// `Σ_α c_α x^α`.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    /// All `∂^β P(x)` for `|β| <= order`, in graded order, from one table of
    /// coordinate powers.
    pub(crate) fn jet_unchecked(&self, x: &[T], order: usize) -> Vec<T> {
        let d = self.dim;
        let w = self.degree + 1;
        let mut powers = vec![T::one(); d * w];
        for i in 0..d {
            for e in 1..w {
                powers[i * w + e] = powers[i * w + e - 1] * x[i];
            }
        }
        let betas = enumerate_multiindices(d, order);
        let mut out = vec![T::zero(); betas.len()];
        let mut alpha = vec![0u32; d];
        for &c in &self.coeffs {
            if c != T::zero() {
                for (o, beta) in out.iter_mut().zip(&betas) {
                    let mut m = c;
                    let mut divides = true;
                    for (i, &b) in beta.exponents().iter().enumerate() {
                        let a = alpha[i];
                        if b > a {
                            divides = false;
                            break;
                        }
                        let falling: f64 = ((a - b + 1)..=a).map(|t| t as f64).product();
                        m *= T::from_f64(falling) * powers[i * w + (a - b) as usize];
                    }
                    if divides {
                        *o += m;
                    }
                }
            }
            next_graded(&mut alpha);
        }
        out
    }

    pub(crate) fn eval_unchecked(&self, x: &[T]) -> T {
        let d = self.dim;
        let deg = self.degree;
        let mut powers = vec![T::one(); d * (deg + 1)];
        for i in 0..d {
            for e in 1..=deg {
                powers[i * (deg + 1) + e] = powers[i * (deg + 1) + e - 1] * x[i];
            }
        }
        let mut alpha = vec![0u32; d];
        let mut acc = T::zero();
        for &c in &self.coeffs {
            if c != T::zero() {
                let mut m = c;
                for i in 0..d {
                    m *= powers[i * (deg + 1) + alpha[i] as usize];
                }
                acc += m;
            }
            next_graded(&mut alpha);
        }
        acc
    }

    /// Formal derivative `∂^α P`; the degree bound drops by `|α|`.
    pub fn diff(&self, alpha: &MultiIndex) -> Self {
        assert_eq!(alpha.dim(), self.dim);
        let k = alpha.order();
        if k > self.degree {
            return Self::zero(self.dim, 0);
        }
        let mut out = Self::zero(self.dim, self.degree - k);
        for (a, c) in self.terms() {
            if c == T::zero() {
                continue;
            }
            if let Some(rest) = a.checked_sub(alpha) {
                out.coeffs[rest.rank()] += c * T::from_f64(a.falling_factorial(alpha));
            }
        }
        out
    }

    /// `∂P / ∂x_i`.
    pub fn diff_var(&self, i: usize) -> Self {
        self.diff(&MultiIndex::unit(self.dim, i))
    }

    /// `P · (x_var - shift)`, degree bound raised by one.
    pub fn mul_linear(&self, var: usize, shift: T) -> Self {
        let mut out = Self::zero(self.dim, self.degree + 1);
        let mut alpha = vec![0u32; self.dim];
        for (r, &c) in self.coeffs.iter().enumerate() {
            if c != T::zero() {
                out.coeffs[r] -= c * shift;
                alpha[var] += 1;
                out.coeffs[graded_rank(&alpha)] += c;
                alpha[var] -= 1;
            }
            next_graded(&mut alpha);
        }
        out
    }

    /// Same polynomial with a different degree bound. Fails if a nonzero
    /// coefficient would be dropped.
    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        let n = basis_len(self.dim, degree);
        if degree >= self.degree {
            let mut coeffs = self.coeffs.clone();
            coeffs.resize(n, T::zero());
            return Ok(Polynomial {
                dim: self.dim,
                degree,
                coeffs,
            });
        }
        if self.coeffs[n..].iter().any(|c| *c != T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "polynomial has terms above degree {degree}"
            )));
        }
        Ok(Polynomial {
            dim: self.dim,
            degree,
            coeffs: self.coeffs[..n].to_vec(),
        })
    }

    pub fn scale(&self, s: T) -> Self {
        Polynomial {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let degree = self.degree.max(other.degree);
        let mut coeffs = vec![T::zero(); basis_len(self.dim, degree)];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        Polynomial {
            dim: self.dim,
            degree,
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    /// `self += s · other`, with `other.degree() <= self.degree()`.
    pub fn add_scaled(&mut self, s: T, other: &Self) {
        assert!(other.degree <= self.degree && other.dim == self.dim);
        for (i, &c) in other.coeffs.iter().enumerate() {
            self.coeffs[i] += s * c;
        }
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .coeffs
            .iter()
            .map(|c| c.modulus())
            .fold(0.0, f64::max)
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.modulus()).fold(0.0, f64::max)
    }
}

impl Polynomial<f64> {
    /// Real polynomial viewed as a complex one.
    pub fn to_complex(&self) -> Polynomial<num_complex::Complex64> {
        Polynomial {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| num_complex::Complex64::new(c, 0.0))
                .collect(),
        }
    }
}
