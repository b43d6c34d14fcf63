use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

/// Exponent vector `α ∈ N^d`; `∂^α = ∂_1^{α_1} … ∂_d^{α_d}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The unit vector `e_i`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `|α| = Σ α_i`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    /// Componentwise `self <= other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !other.divides(self) {
            return None;
        }
        Some(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn with_increment(&self, i: usize) -> MultiIndex {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    /// `α! = Π α_i!`.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a as usize)).product()
    }

    /// `α! / (α - β)!`, the coefficient produced by `∂^β x^α`.
    pub fn falling_factorial(&self, beta: &MultiIndex) -> f64 {
        self.0
            .iter()
            .zip(&beta.0)
            .map(|(&a, &b)| ((a - b + 1)..=a).map(|t| t as f64).product::<f64>())
            .product()
    }

    /// Position in the graded order (see [`enumerate_multiindices`]).
    pub fn rank(&self) -> usize {
        graded_rank(&self.0)
    }

    pub fn pow<T: crate::Scalar>(&self, x: &[T]) -> T {
        let mut acc = T::one();
        for (xi, &a) in x.iter().zip(&self.0) {
            for _ in 0..a {
                acc *= *xi;
            }
        }
        acc
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|t| t as f64).product()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Number of multi-indices in `d` variables with `|α| <= p`: `C(p + d, d)`.
pub fn basis_len(dim: usize, degree: usize) -> usize {
    binomial(degree + dim, dim)
}

/// All `α` with `|α| = n`, in descending lexicographic order.
pub fn homogeneous_multiindices(dim: usize, n: usize) -> Vec<MultiIndex> {
    fn rec(dim: usize, n: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if dim == 1 {
            prefix.push(n as u32);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=n).rev() {
            prefix.push(first as u32);
            rec(dim - 1, n - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::with_capacity(binomial(n + dim - 1, dim - 1));
    rec(dim, n, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// All `α` with `|α| <= p` in graded order: by total degree, then
/// descending lexicographic within a degree. For `d = 2, p = 2` this is
/// `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`.
pub fn enumerate_multiindices(dim: usize, degree: usize) -> Vec<MultiIndex> {
    assert!(dim >= 1, "dimension must be positive");
    (0..=degree)
        .flat_map(|n| homogeneous_multiindices(dim, n))
        .collect()
}

/// Advances `alpha` to its successor in graded order, in place.
pub fn next_graded(alpha: &mut [u32]) {
    let d = alpha.len();
    let tail = alpha[d - 1];
    alpha[d - 1] = 0;
    match (0..d - 1).rev().find(|&i| alpha[i] > 0) {
        Some(i) => {
            alpha[i] -= 1;
            alpha[i + 1] = tail + 1;
        }
        None => alpha[0] = tail + 1,
    }
}

pub(crate) fn graded_rank(alpha: &[u32]) -> usize {
    let d = alpha.len();
    let n: usize = alpha.iter().map(|&a| a as usize).sum();
    let mut pos = if n == 0 { 0 } else { binomial(n - 1 + d, d) };
    let mut rem = n;
    for i in 0..d.saturating_sub(1) {
        let a = alpha[i] as usize;
        let parts = d - i - 1;
        for b in a + 1..=rem {
            pos += binomial(rem - b + parts - 1, parts - 1);
        }
        rem -= a;
    }
    pos
}
