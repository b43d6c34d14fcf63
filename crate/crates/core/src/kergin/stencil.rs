use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::polyalg::{homogeneous_multiindices, MultiIndex, PolyVectorField, Polynomial};
use crate::scalar::Scalar;

use super::config::PointConfiguration;
use super::jet::{order_slice, Jet, VectorJet};
use super::simplex::simplex_rule;

/// One term `r` of the Micchelli sum: cubature nodes in physical space and
/// the polynomials `T_β(z) = Σ_{a: count(a) = β} Π_l (z − x_l)_{a_l}`.
#[derive(Clone, Debug)]
pub struct StencilLevel<T> {
    pub r: usize,
    /// `Σ_i v_i x_i` for each barycentric cubature node `v` of `Σ^r`.
    pub nodes: Vec<Vec<T>>,
    pub weights: Vec<f64>,
    /// All `β` with `|β| = r`, in the order of [`homogeneous_multiindices`].
    pub betas: Vec<MultiIndex>,
    /// `T_β`, same order as `betas`, with degree bound `m − 1`.
    pub polys: Vec<Polynomial<T>>,
}

/// The Kergin interpolation operator of an `m`-point configuration written
/// as a linear combination of derivative evaluations:
///
/// `Π f = Σ_r Σ_q w_q Σ_{|β|=r} ∂^β f(y_q) T_β`.
#[derive(Clone, Debug)]
pub struct KerginStencil<T = f64> {
    dim: usize,
    levels: Vec<StencilLevel<T>>,
}

impl<T: Scalar> KerginStencil<T> {
    /// Builds the stencil with a cubature of the given exact degree
    /// (`2m` when `None`).
    pub fn new(config: &PointConfiguration<T>, exact_degree: Option<usize>) -> Self {
        let m = config.len();
        let d = config.dim();
        let exact = exact_degree.unwrap_or(2 * m);
        let degree = m - 1;
        let mut levels = Vec::with_capacity(m);
        // T_β by expanding one factor (z − x_l) at a time, keyed by the partial count vector.
        let mut partial: HashMap<Vec<u32>, Polynomial<T>> = HashMap::new();
        partial.insert(vec![0; d], Polynomial::constant(d, 0, T::one()));
        for r in 0..m {
            if r > 0 {
                let shift = config.point(r - 1);
                let mut next: HashMap<Vec<u32>, Polynomial<T>> = HashMap::new();
                for (gamma, poly) in &partial {
                    for a in 0..d {
                        let mut key = gamma.clone();
                        key[a] += 1;
                        let term = poly.mul_linear(a, shift[a]);
                        match next.get_mut(&key) {
                            Some(acc) => acc.add_scaled(T::one(), &term),
                            None => {
                                next.insert(key, term);
                            }
                        }
                    }
                }
                partial = next;
            }
            let betas = homogeneous_multiindices(d, r);
            let polys = betas
                .iter()
                .map(|b| {
                    partial[b.exponents()]
                        .with_degree(degree)
                        .expect("degree r ≤ m − 1")
                })
                .collect();
            let rule = simplex_rule(r, exact.saturating_sub(r));
            let nodes = rule
                .nodes()
                .iter()
                .map(|v| {
                    let mut y = vec![T::zero(); d];
                    for (vi, x) in v.iter().zip(config.points()) {
                        for (yj, xj) in y.iter_mut().zip(x) {
                            *yj += T::from_f64(*vi) * *xj;
                        }
                    }
                    y
                })
                .collect();
            levels.push(StencilLevel {
                r,
                nodes,
                weights: rule.weights().to_vec(),
                betas,
                polys,
            });
        }
        KerginStencil { dim: d, levels }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Degree bound `m − 1` of the interpolants.
    pub fn degree(&self) -> usize {
        self.levels.len() - 1
    }

    /// Highest derivative order the stencil reads.
    pub fn required_order(&self) -> usize {
        self.degree()
    }

    pub fn levels(&self) -> &[StencilLevel<T>] {
        &self.levels
    }

    /// Total number of derivative evaluation nodes.
    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|l| l.nodes.len()).sum()
    }

    /// Interpolant from a callback returning the order-`r` derivatives
    /// (component-stacked, `codim` blocks) at a node of level `r`.
    pub fn apply_with<F>(&self, codim: usize, mut derivs: F) -> PolyVectorField<T>
    where
        F: FnMut(usize, &[T]) -> Vec<Vec<T>>,
    {
        let mut out = vec![Polynomial::zero(self.dim, self.degree()); codim];
        for level in &self.levels {
            let nb = level.betas.len();
            let mut acc = vec![T::zero(); codim * nb];
            for (y, w) in level.nodes.iter().zip(&level.weights) {
                let vals = derivs(level.r, y);
                for (c, v) in vals.iter().enumerate() {
                    for (b, &x) in v.iter().enumerate() {
                        acc[c * nb + b] += T::from_f64(*w) * x;
                    }
                }
            }
            for (c, o) in out.iter_mut().enumerate() {
                for (b, poly) in level.polys.iter().enumerate() {
                    let s = acc[c * nb + b];
                    if s != T::zero() {
                        o.add_scaled(s, poly);
                    }
                }
            }
        }
        PolyVectorField::new(out).expect("components share dimension")
    }

    pub fn apply_scalar<J: Jet<T> + ?Sized>(&self, f: &J) -> Result<Polynomial<T>> {
        self.check(f.dim(), f.order())?;
        let d = self.dim;
        let g = self.apply_with(1, |r, y| vec![order_slice(&f.jet(y, r), d, r).to_vec()]);
        Ok(g.into_components().pop().expect("one component"))
    }

    pub fn apply_vector<J: VectorJet<T> + ?Sized>(&self, f: &J) -> Result<PolyVectorField<T>> {
        self.check(f.dim(), f.order())?;
        let d = self.dim;
        Ok(self.apply_with(f.codim(), |r, y| {
            f.jets(y, r)
                .iter()
                .map(|j| order_slice(j, d, r).to_vec())
                .collect()
        }))
    }

    fn check(&self, dim: usize, order: usize) -> Result<()> {
        if dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            });
        }
        if order < self.required_order() {
            return Err(Error::JetOrderTooLow {
                required: self.required_order(),
                available: order,
            });
        }
        Ok(())
    }
}
