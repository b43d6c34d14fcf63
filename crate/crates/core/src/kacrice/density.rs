use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::gaussfield::{
    gaussian_density_at_zero, jet_covariance, ConditionalGaussian, GaussianFieldModel, ModelKind,
    Site,
};
use crate::kergin::{KerginStencil, PointConfiguration};
use crate::linalg::{det, psd_factor, symmetrize};
use crate::polyalg::{MultiIndex, PolyVectorField, Polynomial};
use crate::rng::{self, fill_standard_normal};
use crate::stats::{merge_all, SampleStats};

use super::frame::{
    evaluation_frame, jacobian_functional, EvaluationFrame, LambdaOptions, SpacePair,
};

/// Samples per chunk in the Monte Carlo loops; fixed so that reductions do
/// not depend on the number of threads.
const CHUNK: usize = 512;

pub const DEFAULT_KAC_SAMPLES: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KacOptions {
    /// Monte Carlo samples for the conditional expectation.
    pub samples: usize,
    pub seed: u64,
    pub lambda: LambdaOptions,
    /// Cubature exactness of the Kergin interpolants (`2(p+1)` when `None`).
    pub exact_degree: Option<usize>,
    pub execution: Execution,
}

impl Default for KacOptions {
    fn default() -> Self {
        KacOptions {
            samples: DEFAULT_KAC_SAMPLES,
            seed: 0,
            lambda: LambdaOptions::default(),
            exact_degree: None,
            execution: Execution::default(),
        }
    }
}

impl KacOptions {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Monte Carlo estimate of the Kac density `ρ_F(y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KacDensity {
    pub rho: f64,
    pub rho_se: f64,
    /// Density of `δ_y F` at zero.
    pub psi_delta: f64,
    pub samples: usize,
}

/// `ρ`, `R`, `σ` at one configuration, with the frame and Jacobian-norm
/// diagnostics. Both densities are estimated from the same draws.
#[derive(Clone, Debug)]
pub struct KacFactorization {
    /// The configuration in canonical point order.
    pub config: PointConfiguration,
    pub rho: f64,
    pub rho_se: f64,
    pub r: f64,
    pub sigma: f64,
    pub sigma_se: f64,
    /// `sqrt(rho_se² + (R·sigma_se)²)`.
    pub combined_se: f64,
    /// Mean and standard error of the per-draw difference `ρ_i − R σ_i`.
    pub paired_diff: f64,
    pub paired_se: f64,
    pub det_a: f64,
    pub lambdas: Vec<f64>,
    pub psi_delta: f64,
    pub psi_d: f64,
    pub samples: usize,
    pub frame: EvaluationFrame,
}

impl KacFactorization {
    /// Standard error of the conditional-expectation estimate behind `σ`.
    pub fn mc_error(&self) -> f64 {
        self.sigma_se
    }

    pub fn identity_gap(&self) -> f64 {
        (self.rho - self.r * self.sigma).abs()
    }

    /// `|ρ − R σ| ≤ n_se · combined_se`.
    pub fn identity_holds(&self, n_se: f64) -> bool {
        self.identity_gap() <= n_se * self.combined_se
    }
}

fn check_model<M: GaussianFieldModel + ?Sized>(
    model: &M,
    config: &PointConfiguration,
) -> Result<()> {
    if config.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: config.dim(),
        });
    }
    if model.codim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: model.codim(),
        });
    }
    if config.is_empty() {
        return Err(Error::InvalidArgument("empty configuration".into()));
    }
    Ok(())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least two Monte Carlo samples, got {samples}"
        )));
    }
    Ok(())
}

/// `Π_k |det M_k|` over the consecutive `d × d` row-major blocks of `z`.
fn product_of_abs_dets(z: &[f64], d: usize, blocks: usize) -> f64 {
    (0..blocks)
        .map(|k| det(&z[k * d * d..(k + 1) * d * d], d).abs())
        .product()
}

/// Draws `mean + L ξ` for `samples` indices and folds each draw with `f`
/// into one statistic per output, chunked in index order.
fn monte_carlo<F>(
    mean: &DVector<f64>,
    factor: &DMatrix<f64>,
    samples: usize,
    seed: u64,
    execution: Execution,
    outputs: usize,
    f: F,
) -> Vec<SampleStats>
where
    F: Fn(&[f64], &mut [f64]) + Sync + Send,
{
    let n = mean.len();
    let parts = execution.map_chunks(samples, CHUNK, |_, range| {
        let mut stats = vec![SampleStats::new(); outputs];
        let mut xi = DVector::zeros(factor.ncols());
        let mut z = DVector::zeros(n);
        let mut out = vec![0.0; outputs];
        for i in range {
            let mut r = rng::stream(seed, i as u64);
            fill_standard_normal(&mut r, xi.as_mut_slice());
            z.copy_from(mean);
            z.gemv(1.0, factor, &xi, 1.0);
            f(z.as_slice(), &mut out);
            for (s, &v) in stats.iter_mut().zip(&out) {
                s.push(v);
            }
        }
        stats
    });
    (0..outputs)
        .map(|o| merge_all(parts.iter().map(|p| &p[o])))
        .collect()
}

/// Conditional Monte Carlo estimate of
/// `ρ_F(y) = E[Π_k |det ∇F(y_k)| | F(y_1) = … = F(y_p) = 0] ψ_{δ_y F}(0)`.
///
/// The points are put in canonical order first, so the estimate is
/// invariant under relabelling.
pub fn kac_density_direct<M: GaussianFieldModel + ?Sized>(
    model: &M,
    config: &PointConfiguration,
    opts: &KacOptions,
) -> Result<KacDensity> {
    check_model(model, config)?;
    check_samples(opts.samples)?;
    let (config, _) = config.canonical();
    let d = model.dim();
    let p = config.len();
    let jet = jet_covariance(model, &config, 1)?;
    let values = jet.positions_of_order(0);
    // Gradient entry (k, i, v) = ∂_v F_i(y_k), laid out k-major then row-major.
    let mut grads = vec![0; p * d * d];
    for (pos, ix) in jet.index.iter().enumerate() {
        if ix.alpha.order() == 1 {
            let v = ix
                .alpha
                .exponents()
                .iter()
                .position(|&a| a == 1)
                .expect("unit multi-index");
            grads[ix.point * d * d + ix.component * d + v] = pos;
        }
    }
    let cond = ConditionalGaussian::centered(jet.matrix.clone())
        .condition(&values, &vec![0.0; values.len()])?;
    let (_, value_cov) = ConditionalGaussian::centered(jet.matrix.clone()).marginal(&values);
    let psi_delta = gaussian_density_at_zero(&value_cov)?;
    let (mean, cov) = cond.marginal(&grads);
    let factor = psd_factor(&cov);
    let stats = monte_carlo(
        &mean,
        &factor,
        opts.samples,
        opts.seed,
        opts.execution,
        1,
        |z, out| {
            out[0] = product_of_abs_dets(z, d, p);
        },
    );
    Ok(KacDensity {
        rho: psi_delta * stats[0].mean,
        rho_se: psi_delta * stats[0].stderr(),
        psi_delta,
        samples: opts.samples,
    })
}

/// Deduplicated list of derivative evaluations `∂^α F_c(x)`.
#[derive(Default)]
struct SiteTable {
    lookup: HashMap<(Vec<u64>, Vec<u32>, usize), usize>,
    sites: Vec<Site>,
}

impl SiteTable {
    fn index(&mut self, point: &[f64], alpha: &MultiIndex, component: usize) -> usize {
        // Normalise -0.0 so that equal points share a site.
        let key = (
            point.iter().map(|x| (x + 0.0).to_bits()).collect(),
            alpha.exponents().to_vec(),
            component,
        );
        let sites = &mut self.sites;
        *self.lookup.entry(key).or_insert_with(|| {
            sites.push(Site::new(point.to_vec(), alpha.clone(), component));
            sites.len() - 1
        })
    }
}

/// The factorisation `ρ_F(y) = R(y) σ_F(y)`, with
/// `R = Π_k λ_y^k / |det A_y|` and
/// `σ_F = E[Π_k |H_y^k F| | D_y F = 0] ψ_{D_y F}(0)`, `H_y^k = h_y^k ∘ K_y^k`.
///
/// The vector `(δ_y F, ∇F(y_k), ∇(Proj K_y^k F)(y_k))` is Gaussian and
/// linear in finitely many derivatives of `F` (the Kergin stencils), so it
/// is drawn exactly from its conditional law given `δ_y F = 0`. `ρ` and `σ`
/// are estimated from the same draws.
pub fn kac_factorization<M: GaussianFieldModel + ?Sized>(
    model: &M,
    spaces: &SpacePair,
    config: &PointConfiguration,
    opts: &KacOptions,
) -> Result<KacFactorization> {
    if model.kind() == ModelKind::BargmannFockComplex {
        return Err(Error::Unsupported("factorisation for complex fields"));
    }
    check_model(model, config)?;
    check_samples(opts.samples)?;
    let d = model.dim();
    let p = config.len();
    if spaces.ambient_dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: spaces.ambient_dim(),
        });
    }
    if spaces.p() != p {
        return Err(Error::InvalidArgument(format!(
            "spaces are built for {} points, configuration has {p}",
            spaces.p()
        )));
    }
    if model.max_order() < p {
        return Err(Error::JetOrderTooLow {
            required: p,
            available: model.max_order(),
        });
    }
    let (config, _) = config.canonical();
    let frame = evaluation_frame(&spaces.v0, &config)?;
    let functionals = (1..=p)
        .map(|k| jacobian_functional(&spaces.v, &config, k, &opts.lambda))
        .collect::<Result<Vec<_>>>()?;
    let lambdas: Vec<f64> = functionals.iter().map(|h| h.lambda()).collect();
    let r_factor = lambdas.iter().product::<f64>() / frame.det_a.abs();

    // Rows: δF (dp), ∇F(y_k) (d²p), ∇(Proj K^k F)(y_k) (d²p).
    let dd = d * d;
    let n_rows = d * p + 2 * dd * p;
    let mut table = SiteTable::default();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
    let zero = MultiIndex::zero(d);
    for (k, y) in config.points().iter().enumerate() {
        for c in 0..d {
            rows[k * d + c].push((table.index(y, &zero, c), 1.0));
            for v in 0..d {
                rows[d * p + k * dd + c * d + v]
                    .push((table.index(y, &MultiIndex::unit(d, v), c), 1.0));
            }
        }
    }
    for (k, h) in functionals.iter().enumerate() {
        let aug = config.augmented(k + 1)?;
        let stencil = KerginStencil::<f64>::new(&aug, opts.exact_degree);
        let row0 = d * p + dd * p + k * dd;
        for level in stencil.levels() {
            for (beta, poly) in level.betas.iter().zip(&level.polys) {
                for c in 0..d {
                    let mut comps = vec![Polynomial::zero(d, poly.degree()); d];
                    comps[c] = poly.clone();
                    let coords = spaces.v.coordinates(&PolyVectorField::new(comps)?)?;
                    let g = h.map() * coords;
                    if g.iter().all(|&x| x == 0.0) {
                        continue;
                    }
                    for (node, &w) in level.nodes.iter().zip(&level.weights) {
                        let site = table.index(node, beta, c);
                        for (j, &gj) in g.iter().enumerate() {
                            if gj != 0.0 {
                                rows[row0 + j].push((site, w * gj));
                            }
                        }
                    }
                }
            }
        }
    }
    let sites = table.sites;
    let s = model.covariance_matrix(&sites);
    let mut phi = DMatrix::<f64>::zeros(n_rows, sites.len());
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            phi[(i, j)] += v;
        }
    }
    let mut cov = &phi * s * phi.transpose();
    symmetrize(&mut cov);

    let values: Vec<usize> = (0..d * p).collect();
    let (_, value_cov) = ConditionalGaussian::centered(cov.clone()).marginal(&values);
    let cond = ConditionalGaussian::centered(cov).condition(&values, &vec![0.0; values.len()])?;
    let psi_delta = gaussian_density_at_zero(&value_cov)?;
    // Cov(D F) = A^{-1} Cov(δF) A^{-T}.
    let a_inv_cov = frame
        .a
        .solve_lower_triangular(&value_cov)
        .ok_or_else(|| Error::DiagonalDegeneracy("singular Gram-Schmidt factor".into()))?;
    let mut d_cov = frame
        .a
        .solve_lower_triangular(&a_inv_cov.transpose())
        .ok_or_else(|| Error::DiagonalDegeneracy("singular Gram-Schmidt factor".into()))?;
    symmetrize(&mut d_cov);
    let psi_d = gaussian_density_at_zero(&d_cov)?;

    let free: Vec<usize> = (d * p..n_rows).collect();
    let (mean, free_cov) = cond.marginal(&free);
    let factor = psd_factor(&free_cov);
    let lambda_prod: f64 = lambdas.iter().product();
    let stats = monte_carlo(
        &mean,
        &factor,
        opts.samples,
        opts.seed,
        opts.execution,
        3,
        |z, out| {
            let rho_i = psi_delta * product_of_abs_dets(&z[..dd * p], d, p);
            let sigma_i = psi_d * product_of_abs_dets(&z[dd * p..], d, p) / lambda_prod;
            out[0] = rho_i;
            out[1] = sigma_i;
            out[2] = rho_i - r_factor * sigma_i;
        },
    );
    let (rho, rho_se) = (stats[0].mean, stats[0].stderr());
    let (sigma, sigma_se) = (stats[1].mean, stats[1].stderr());
    Ok(KacFactorization {
        config,
        rho,
        rho_se,
        r: r_factor,
        sigma,
        sigma_se,
        combined_se: (rho_se * rho_se + (r_factor * sigma_se).powi(2)).sqrt(),
        paired_diff: stats[2].mean,
        paired_se: stats[2].stderr(),
        det_a: frame.det_a,
        lambdas,
        psi_delta,
        psi_d,
        samples: opts.samples,
        frame,
    })
}

/// `R(y) = Π_k λ_y^k / |det A_y|`, which depends only on the spaces and the
/// configuration.
pub fn r_factor(
    spaces: &SpacePair,
    config: &PointConfiguration,
    lambda: &LambdaOptions,
) -> Result<f64> {
    let (config, _) = config.canonical();
    let frame = evaluation_frame(&spaces.v0, &config)?;
    let mut prod = 1.0;
    for k in 1..=config.len() {
        prod *= jacobian_functional(&spaces.v, &config, k, lambda)?.lambda();
    }
    Ok(prod / frame.det_a.abs())
}
