use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kergin::{Jet, VectorJet};
use crate::polyalg::{basis_len, enumerate_multiindices, next_graded, MultiIndex};
use crate::region::BoxDomain;
use crate::rng::{self, standard_normal};

use super::kernel::hermite_table;
use super::model::{GaussianFieldModel, ModelKind};

/// Largest series truncation order a sampler will use.
pub const TRUNCATION_CAP: usize = 400;

/// Bound on the standard deviation of the neglected part `|α| > n` of the
/// series and of its derivatives up to order `q`, on a region where
/// `|x|² ≤ s`: the square root of
/// `max_{j ≤ q} 2^j Σ_{m > n} (m + s + 1)^j P_s(m − j)`,
/// with `P_s` the Poisson(s) probability mass function.
pub fn series_tail_bound(s: f64, n: usize, q: usize) -> f64 {
    let log_pmf = |m: usize| -> f64 {
        if s == 0.0 {
            return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
        }
        -s + m as f64 * s.ln() - ln_factorial(m)
    };
    let stop = n + 1 + (s + 20.0 * s.sqrt() + 60.0) as usize;
    let mut worst = 0.0f64;
    for j in 0..=q {
        let mut total = 0.0;
        for m in n + 1..=stop {
            if m < j {
                continue;
            }
            let lp = log_pmf(m - j);
            if lp == f64::NEG_INFINITY {
                continue;
            }
            total += ((m as f64 + s + 1.0).ln() * j as f64 + lp).exp();
        }
        worst = worst.max(2f64.powi(j as i32) * total);
    }
    worst.sqrt()
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

/// Draws sample paths of real or complex Bargmann–Fock series, truncated at
/// the smallest order `N` whose tail bound on the box is at most `tol`.
#[derive(Clone, Debug)]
pub struct BfSampler {
    dim: usize,
    copies: usize,
    complex: bool,
    center: Vec<f64>,
    bbox: BoxDomain,
    n_trunc: usize,
    tail_bound: f64,
    order: usize,
}

impl BfSampler {
    /// `copies` independent real fields `φ(x) = ψ(x) e^{-|x|²/2}`.
    ///
    /// The series is expanded about the box centre, which leaves the law
    /// unchanged (the field is stationary) and keeps `N` small.
    pub fn real(
        dim: usize,
        copies: usize,
        bbox: &BoxDomain,
        tol: f64,
        order: usize,
    ) -> Result<Self> {
        if bbox.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bbox.dim(),
            });
        }
        Self::build(
            dim,
            copies,
            false,
            bbox.center(),
            bbox.clone(),
            bbox.squared_radius(),
            tol,
            order,
        )
    }

    /// `copies` independent holomorphic series `ψ_C` on `C^d`, with the box
    /// given in realified coordinates `(Re z, Im z)`. The tail bound is
    /// relative to the standard deviation `e^{|z|²/2}` of the field.
    pub fn complex(
        complex_dim: usize,
        copies: usize,
        bbox: &BoxDomain,
        tol: f64,
        order: usize,
    ) -> Result<Self> {
        if bbox.dim() != 2 * complex_dim {
            return Err(Error::DimensionMismatch {
                expected: 2 * complex_dim,
                found: bbox.dim(),
            });
        }
        let s: f64 = bbox
            .lo()
            .iter()
            .zip(bbox.hi())
            .map(|(a, b)| a.abs().max(b.abs()).powi(2))
            .sum();
        Self::build(
            complex_dim,
            copies,
            true,
            vec![0.0; 2 * complex_dim],
            bbox.clone(),
            s,
            tol,
            order,
        )
    }

    /// Sampler for the fields of `model`. Gradient models are rejected: sample
    /// the scalar potential and differentiate the path instead.
    pub fn for_model<M: GaussianFieldModel + ?Sized>(
        model: &M,
        bbox: &BoxDomain,
        tol: f64,
        order: usize,
    ) -> Result<Self> {
        if model.is_gradient() {
            return Err(Error::Unsupported("series sampling of gradient models"));
        }
        match model.kind() {
            ModelKind::BargmannFockReal | ModelKind::ProductOfIndependents => {
                Self::real(model.dim(), model.codim(), bbox, tol, order)
            }
            ModelKind::BargmannFockComplex => {
                Self::complex(model.dim() / 2, model.codim() / 2, bbox, tol, order)
            }
            ModelKind::CustomKernel => Err(Error::Unsupported("series sampling of custom kernels")),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        dim: usize,
        copies: usize,
        complex: bool,
        center: Vec<f64>,
        bbox: BoxDomain,
        s: f64,
        tol: f64,
        order: usize,
    ) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let mut n = 0;
        loop {
            let tail = series_tail_bound(s, n, order);
            if tail <= tol {
                return Ok(BfSampler {
                    dim,
                    copies,
                    complex,
                    center,
                    bbox,
                    n_trunc: n,
                    tail_bound: tail,
                    order,
                });
            }
            if n == TRUNCATION_CAP {
                return Err(Error::TruncationCap {
                    required: n + 1,
                    cap: TRUNCATION_CAP,
                });
            }
            n += 1;
        }
    }

    pub fn truncation(&self) -> usize {
        self.n_trunc
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn bbox(&self) -> &BoxDomain {
        &self.bbox
    }

    /// Derivative order covered by the tail bound.
    pub fn order(&self) -> usize {
        self.order
    }

    fn coefficient_count(&self) -> usize {
        basis_len(self.dim, self.n_trunc)
    }

    /// The path for `(seed, index)`; component `c` reads stream
    /// `index · copies + c`, coefficients in graded order.
    pub fn draw(&self, seed: u64, index: u64) -> Result<SamplePath> {
        if self.complex {
            return Err(Error::Unsupported("real draw from a complex sampler"));
        }
        let n = self.coefficient_count();
        let coeffs = (0..self.copies)
            .map(|c| {
                let mut r = rng::stream(seed, index * self.copies as u64 + c as u64);
                (0..n).map(|_| standard_normal(&mut r)).collect()
            })
            .collect();
        Ok(SamplePath {
            dim: self.dim,
            center: self.center.clone(),
            n_trunc: self.n_trunc,
            coeffs,
            tail_bound: self.tail_bound,
            bbox: self.bbox.clone(),
        })
    }

    pub fn draw_complex(&self, seed: u64, index: u64) -> Result<ComplexSamplePath> {
        if !self.complex {
            return Err(Error::Unsupported("complex draw from a real sampler"));
        }
        let n = self.coefficient_count();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let coeffs = (0..self.copies)
            .map(|c| {
                let mut r = rng::stream(seed, index * self.copies as u64 + c as u64);
                (0..n)
                    .map(|_| {
                        Complex64::new(h * standard_normal(&mut r), h * standard_normal(&mut r))
                    })
                    .collect()
            })
            .collect();
        Ok(ComplexSamplePath {
            dim: self.dim,
            n_trunc: self.n_trunc,
            coeffs,
            tail_bound: self.tail_bound,
        })
    }
}

/// `sample_path(model, box, tol, seed)`: the path of index 0, with the tail
/// bound covering values and first derivatives.
pub fn sample_path<M: GaussianFieldModel + ?Sized>(
    model: &M,
    bbox: &BoxDomain,
    tol: f64,
    seed: u64,
) -> Result<SamplePath> {
    BfSampler::for_model(model, bbox, tol, 1)?.draw(seed, 0)
}

/// A truncated real Bargmann–Fock path
/// `φ_c(x) = Σ_{|α| ≤ N} γ_{c,α} (x−c₀)^α/√α! · e^{-|x−c₀|²/2}`.
#[derive(Clone, Debug)]
pub struct SamplePath {
    dim: usize,
    center: Vec<f64>,
    n_trunc: usize,
    coeffs: Vec<Vec<f64>>,
    tail_bound: f64,
    bbox: BoxDomain,
}

/// Values of `∂^β F_c` on a tensor grid, `values[c][b][flat]` with `flat`
/// row-major over the grid (first axis slowest) and `b` indexing `betas`.
#[derive(Clone, Debug)]
pub struct GridJets {
    pub shape: Vec<usize>,
    pub betas: Vec<MultiIndex>,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl GridJets {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid multi-index of a flat position.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for i in (0..self.shape.len()).rev() {
            idx[i] = flat % self.shape[i];
            flat /= self.shape[i];
        }
        idx
    }
}

impl SamplePath {
    pub fn truncation(&self) -> usize {
        self.n_trunc
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn bbox(&self) -> &BoxDomain {
        &self.bbox
    }

    pub fn coefficients(&self, c: usize) -> &[f64] {
        &self.coeffs[c]
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.jets(x, 0).into_iter().map(|v| v[0]).collect()
    }

    /// `v_n^{(b)}(t)` for `v_n(t) = t^n/√n! · e^{-t²/2}`, `n ≤ N`, `b ≤ order`,
    /// stored at `n·(order+1) + b`.
    fn axis_table(&self, t: f64, order: usize) -> Vec<f64> {
        let n_max = self.n_trunc;
        let w = order + 1;
        let mut u = vec![0.0; n_max + 1];
        u[0] = 1.0;
        for n in 1..=n_max {
            u[n] = u[n - 1] * t / (n as f64).sqrt();
        }
        let g = (-0.5 * t * t).exp();
        let he = hermite_table(t, order);
        let gder: Vec<f64> = (0..=order)
            .map(|k| if k % 2 == 0 { he[k] * g } else { -he[k] * g })
            .collect();
        let mut out = vec![0.0; (n_max + 1) * w];
        for n in 0..=n_max {
            // u_n^{(j)} = √(n!/(n−j)!) u_{n−j}
            let mut ud = vec![0.0; w];
            let mut ff = 1.0;
            for j in 0..=order.min(n) {
                if j > 0 {
                    ff *= (n + 1 - j) as f64;
                }
                ud[j] = ff.sqrt() * u[n - j];
            }
            for b in 0..=order {
                let mut acc = 0.0;
                let mut binom = 1.0;
                for j in 0..=b {
                    acc += binom * ud[j] * gder[b - j];
                    binom = binom * (b - j) as f64 / (j + 1) as f64;
                }
                out[n * w + b] = acc;
            }
        }
        out
    }

    /// Jets of all components at every point of the grid `axes[0] × … × axes[d−1]`.
    pub fn grid_jets(&self, axes: &[Vec<f64>], order: usize) -> GridJets {
        assert_eq!(axes.len(), self.dim);
        let d = self.dim;
        let nt = self.n_trunc + 1;
        let w = order + 1;
        let betas = enumerate_multiindices(d, order);
        // tables[i][g] = axis table at grid coordinate g of axis i
        let tables: Vec<Vec<Vec<f64>>> = (0..d)
            .map(|i| {
                axes[i]
                    .iter()
                    .map(|&t| self.axis_table(t - self.center[i], order))
                    .collect()
            })
            .collect();
        let shape: Vec<usize> = axes.iter().map(|a| a.len()).collect();
        let mut values = Vec::with_capacity(self.coeffs.len());
        for coeffs in &self.coeffs {
            // Dense coefficient tensor of shape nt^d.
            let mut dense = vec![0.0; nt.pow(d as u32)];
            let mut alpha = vec![0u32; d];
            for &c in coeffs {
                let flat = alpha.iter().fold(0usize, |acc, &a| acc * nt + a as usize);
                dense[flat] = c;
                next_graded(&mut alpha);
            }
            let per_beta = betas
                .iter()
                .map(|beta| {
                    let mut data = dense.clone();
                    let mut cur: Vec<usize> = vec![nt; d];
                    for i in 0..d {
                        let b = beta.exponents()[i] as usize;
                        let g = shape[i];
                        let m: Vec<f64> = (0..g)
                            .flat_map(|gi| (0..nt).map(move |a| (gi, a)))
                            .map(|(gi, a)| tables[i][gi][a * w + b])
                            .collect();
                        data = contract_axis(&data, &cur, i, &m, g);
                        cur[i] = g;
                    }
                    data
                })
                .collect();
            values.push(per_beta);
        }
        GridJets {
            shape,
            betas,
            values,
        }
    }

    /// Scalar view of component `c`.
    pub fn component(&self, c: usize) -> ComponentPath<'_> {
        ComponentPath {
            path: self,
            component: c,
        }
    }
}

/// `new[pre, g, post] = Σ_a m[g, a] · old[pre, a, post]` on a row-major tensor.
fn contract_axis(old: &[f64], shape: &[usize], axis: usize, m: &[f64], g: usize) -> Vec<f64> {
    let pre: usize = shape[..axis].iter().product();
    let n = shape[axis];
    let post: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; pre * g * post];
    for p in 0..pre {
        for a in 0..n {
            let src = &old[(p * n + a) * post..(p * n + a + 1) * post];
            if src.iter().all(|&v| v == 0.0) {
                continue;
            }
            for gi in 0..g {
                let coef = m[gi * n + a];
                let dst = &mut out[(p * g + gi) * post..(p * g + gi + 1) * post];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += coef * s;
                }
            }
        }
    }
    out
}

impl VectorJet<f64> for SamplePath {
    fn dim(&self) -> usize {
        self.dim
    }

    fn codim(&self) -> usize {
        self.coeffs.len()
    }

    fn order(&self) -> usize {
        usize::MAX
    }

    fn jets(&self, x: &[f64], order: usize) -> Vec<Vec<f64>> {
        let d = self.dim;
        let w = order + 1;
        let tables: Vec<Vec<f64>> = (0..d)
            .map(|i| self.axis_table(x[i] - self.center[i], order))
            .collect();
        let betas = enumerate_multiindices(d, order);
        let mut out = vec![vec![0.0; betas.len()]; self.coeffs.len()];
        let mut alpha = vec![0u32; d];
        let mut prods = vec![0.0; betas.len()];
        for r in 0..self.coeffs[0].len() {
            for (bi, beta) in betas.iter().enumerate() {
                let mut p = 1.0;
                for i in 0..d {
                    p *= tables[i][alpha[i] as usize * w + beta.exponents()[i] as usize];
                }
                prods[bi] = p;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let g = self.coeffs[c][r];
                for (v, p) in o.iter_mut().zip(&prods) {
                    *v += g * p;
                }
            }
            next_graded(&mut alpha);
        }
        out
    }
}

/// One component of a [`SamplePath`] as a scalar jet.
#[derive(Clone, Copy, Debug)]
pub struct ComponentPath<'a> {
    path: &'a SamplePath,
    component: usize,
}

impl Jet<f64> for ComponentPath<'_> {
    fn dim(&self) -> usize {
        self.path.dim
    }

    fn order(&self) -> usize {
        usize::MAX
    }

    fn jet(&self, x: &[f64], order: usize) -> Vec<f64> {
        // Cheap enough: the component loop is the inner one.
        self.path.jets(x, order).swap_remove(self.component)
    }
}

/// A truncated holomorphic series `ψ_C(z) = Σ_{|α| ≤ N} γ_α z^α/√α!`.
#[derive(Clone, Debug)]
pub struct ComplexSamplePath {
    dim: usize,
    n_trunc: usize,
    coeffs: Vec<Vec<Complex64>>,
    tail_bound: f64,
}

impl ComplexSamplePath {
    pub fn truncation(&self) -> usize {
        self.n_trunc
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn coefficients(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub fn eval(&self, z: &[Complex64]) -> Vec<Complex64> {
        self.jets(z, 0).into_iter().map(|v| v[0]).collect()
    }
}

impl VectorJet<Complex64> for ComplexSamplePath {
    fn dim(&self) -> usize {
        self.dim
    }

    fn codim(&self) -> usize {
        self.coeffs.len()
    }

    fn order(&self) -> usize {
        usize::MAX
    }

    fn jets(&self, z: &[Complex64], order: usize) -> Vec<Vec<Complex64>> {
        let d = self.dim;
        let w = order + 1;
        let nt = self.n_trunc + 1;
        // u_n^{(b)}(z) = √(n!/(n−b)!) z^{n−b}/√(n−b)!
        let tables: Vec<Vec<Complex64>> = (0..d)
            .map(|i| {
                let mut u = vec![Complex64::new(1.0, 0.0); nt];
                for n in 1..nt {
                    u[n] = u[n - 1] * z[i] / (n as f64).sqrt();
                }
                let mut t = vec![Complex64::new(0.0, 0.0); nt * w];
                for n in 0..nt {
                    let mut ff = 1.0;
                    for b in 0..=order.min(n) {
                        if b > 0 {
                            ff *= (n + 1 - b) as f64;
                        }
                        t[n * w + b] = ff.sqrt() * u[n - b];
                    }
                }
                t
            })
            .collect();
        let betas = enumerate_multiindices(d, order);
        let mut out = vec![vec![Complex64::new(0.0, 0.0); betas.len()]; self.coeffs.len()];
        let mut alpha = vec![0u32; d];
        for r in 0..self.coeffs[0].len() {
            for (bi, beta) in betas.iter().enumerate() {
                let mut p = Complex64::new(1.0, 0.0);
                for i in 0..d {
                    p *= tables[i][alpha[i] as usize * w + beta.exponents()[i] as usize];
                }
                for (c, o) in out.iter_mut().enumerate() {
                    o[bi] += self.coeffs[c][r] * p;
                }
            }
            next_graded(&mut alpha);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussfield::{
        BargmannFock, ComplexBargmannFock, GradientModel, ProductOfIndependents,
    };

    fn unit_box(d: usize) -> BoxDomain {
        BoxDomain::cube(d, -1.0, 1.0).unwrap()
    }

    #[test]
    fn truncation_is_minimal_and_bound_monotone() {
        let s = BfSampler::real(1, 1, &unit_box(1), 1e-6, 1).unwrap();
        assert!(s.tail_bound() <= 1e-6);
        let n = s.truncation();
        assert!(series_tail_bound(1.0, n - 1, 1) > 1e-6);
        let seq: Vec<f64> = (0..40).map(|n| series_tail_bound(2.0, n, 2)).collect();
        assert!(seq.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn truncation_cap_is_reported() {
        let huge = BoxDomain::cube(3, -40.0, 40.0).unwrap();
        assert!(matches!(
            BfSampler::real(3, 1, &huge, 1e-12, 2),
            Err(Error::TruncationCap { .. })
        ));
    }

    #[test]
    fn deterministic_per_seed() {
        let s = BfSampler::real(2, 2, &unit_box(2), 1e-8, 2).unwrap();
        let a = s.draw(11, 3).unwrap();
        let b = s.draw(11, 3).unwrap();
        assert_eq!(a.jets(&[0.3, -0.4], 2), b.jets(&[0.3, -0.4], 2));
        assert_ne!(
            a.jets(&[0.3, -0.4], 0),
            s.draw(11, 4).unwrap().jets(&[0.3, -0.4], 0)
        );
    }

    #[test]
    fn jets_match_finite_differences() {
        let s = BfSampler::real(2, 1, &BoxDomain::cube(2, -1.5, 1.0).unwrap(), 1e-9, 2).unwrap();
        let p = s.draw(5, 0).unwrap();
        let x = [0.2, -0.7];
        let h = 1e-5;
        let jets = p.jets(&x, 2);
        let tol = (10.0 * p.tail_bound()).max(1e-6);
        for v in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[v] += h;
            xm[v] -= h;
            let fd = (p.eval(&xp)[0] - p.eval(&xm)[0]) / (2.0 * h);
            assert!((fd - jets[0][1 + v]).abs() < tol);
            let dp = p.jets(&xp, 1)[0][1 + v];
            let dm = p.jets(&xm, 1)[0][1 + v];
            let rank = MultiIndex::unit(2, v).with_increment(v).rank();
            assert!(((dp - dm) / (2.0 * h) - jets[0][rank]).abs() < tol);
        }
    }

    #[test]
    fn grid_jets_agree_with_pointwise_jets() {
        let s = BfSampler::real(2, 2, &unit_box(2), 1e-8, 2).unwrap();
        let p = s.draw(2, 9).unwrap();
        let axes = vec![vec![-1.0, -0.2, 0.5], vec![-0.9, 0.0, 0.3, 1.0]];
        let grid = p.grid_jets(&axes, 2);
        assert_eq!(grid.len(), 12);
        for flat in 0..grid.len() {
            let idx = grid.unflatten(flat);
            let x = [axes[0][idx[0]], axes[1][idx[1]]];
            let jets = p.jets(&x, 2);
            for c in 0..2 {
                for b in 0..grid.betas.len() {
                    assert!((grid.values[c][b][flat] - jets[c][b]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gradient_models_are_not_series_sampled() {
        let model = GradientModel::new(BargmannFock::new(2));
        let err = BfSampler::for_model(&model, &unit_box(2), 1e-6, 1).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn unit_variance_at_origin() {
        let model = BargmannFock::new(1);
        let s = BfSampler::for_model(&model, &unit_box(1), 1e-6, 1).unwrap();
        let n = 10_000;
        let vals: Vec<f64> = (0..n)
            .map(|i| s.draw(21, i).unwrap().eval(&[0.0])[0])
            .collect();
        let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
        let mean = sq.iter().sum::<f64>() / n as f64;
        let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn empirical_covariance_matches_kernel() {
        let model = ProductOfIndependents::new(1, 1);
        let s = BfSampler::for_model(&model, &unit_box(1), 1e-6, 1).unwrap();
        let n = 100_000;
        let prods: Vec<f64> = (0..n)
            .map(|i| {
                let p = s.draw(22, i).unwrap();
                p.eval(&[0.0])[0] * p.eval(&[0.7])[0]
            })
            .collect();
        let mean = prods.iter().sum::<f64>() / n as f64;
        let var = prods.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - (-0.245f64).exp()).abs() < 3.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn empirical_covariance_over_point_pairs() {
        let s = BfSampler::real(2, 1, &unit_box(2), 1e-6, 0).unwrap();
        let pairs: Vec<([f64; 2], [f64; 2])> = (0..10)
            .map(|k| {
                let t = k as f64 * 0.6;
                (
                    [0.9 * t.cos() - 0.1, 0.5 * t.sin()],
                    [-0.8 * t.sin(), 0.95 - 0.15 * k as f64],
                )
            })
            .collect();
        let n = 100_000;
        let mut sums = [0.0; 10];
        let mut sq = [0.0; 10];
        for i in 0..n {
            let p = s.draw(23, i).unwrap();
            for (k, (x, y)) in pairs.iter().enumerate() {
                let v = p.eval(x)[0] * p.eval(y)[0];
                sums[k] += v;
                sq[k] += v * v;
            }
        }
        for (k, (x, y)) in pairs.iter().enumerate() {
            let mean = sums[k] / n as f64;
            let se = ((sq[k] / n as f64 - mean * mean) / n as f64).sqrt();
            let d2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
            assert!(
                (mean - (-0.5 * d2).exp()).abs() < 4.0 * se,
                "pair {k}: {mean} ± {se}"
            );
        }
    }

    #[test]
    fn complex_series_second_moment() {
        let model = ComplexBargmannFock::new(1, 1);
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let s = BfSampler::for_model(&model, &bbox, 1e-8, 1).unwrap();
        let z = [Complex64::new(0.6, -0.3)];
        let n = 20_000;
        let vals: Vec<f64> = (0..n)
            .map(|i| s.draw_complex(24, i).unwrap().eval(&z)[0].norm_sqr())
            .collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - z[0].norm_sqr().exp()).abs() < 3.0 * se);
        let p = s.draw_complex(24, 0).unwrap();
        let h = 1e-6;
        let fd = (p.eval(&[z[0] + h])[0] - p.eval(&[z[0] - h])[0]) / (2.0 * h);
        assert!((fd - p.jets(&z, 1)[0][1]).norm() < 1e-6);
    }
}
