use crate::polyalg::{factorial, homogeneous_multiindices};

/// Cubature rule on the standard simplex `Σ^r = {v ∈ R^{r+1}_{≥0} : Σ v_i = 1}`
/// with respect to the Lebesgue measure on the first `r` coordinates, whose
/// total mass is `1/r!`.
#[derive(Clone, Debug)]
pub struct SimplexRule {
    r: usize,
    exact_degree: usize,
    /// Barycentric coordinates, each of length `r + 1`.
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SimplexRule {
    pub fn r(&self) -> usize {
        self.r
    }

    /// All polynomials of total degree at most this are integrated exactly.
    pub fn exact_degree(&self) -> usize {
        self.exact_degree
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ_q w_q g(v_q)`.
    pub fn integrate(&self, mut g: impl FnMut(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| w * g(v))
            .sum()
    }
}

/// Grundmann–Möller rule of odd degree `2s+1 ≥ exact_degree` on `Σ^r`.
///
/// For `r = 0` the simplex is a point and the rule is a single evaluation.
pub fn simplex_rule(r: usize, exact_degree: usize) -> SimplexRule {
    if r == 0 {
        return SimplexRule {
            r,
            exact_degree: usize::MAX,
            nodes: vec![vec![1.0]],
            weights: vec![1.0],
        };
    }
    let s = exact_degree / 2;
    let deg = 2 * s + 1;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for i in 0..=s {
        let denom = (deg + r - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * 0.25f64.powi(s as i32) * denom.powi(deg as i32)
            / (factorial(i) * factorial(deg + r - i));
        for beta in homogeneous_multiindices(r + 1, s - i) {
            nodes.push(
                beta.exponents()
                    .iter()
                    .map(|&b| (2.0 * b as f64 + 1.0) / denom)
                    .collect(),
            );
            weights.push(w);
        }
    }
    SimplexRule {
        r,
        exact_degree: deg,
        nodes,
        weights,
    }
}
