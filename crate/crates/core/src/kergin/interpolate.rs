use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::polyalg::{enumerate_multiindices, MultiIndex, PolyVectorField, Polynomial};
use crate::scalar::Scalar;

use super::config::{realify, PointConfiguration};
use super::jet::{Components, Gradient, Jet, VectorJet};
use super::stencil::KerginStencil;

/// Tolerance on the curl and Cauchy–Riemann residuals, relative to the
/// largest coefficient of the interpolant (floored at 1).
pub const CLOSURE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KerginOptions {
    /// Exact degree of the simplex cubature; `2m` for `m` points when unset.
    pub exact_degree: Option<usize>,
}

/// `Π_x f` or `Π^k_x F = Π_{(x, x_k)} F` together with its configuration.
#[derive(Clone, Debug)]
pub struct KerginInterpolant<T: Scalar = f64> {
    field: PolyVectorField<T>,
    config: PointConfiguration<T>,
    k: usize,
    closure_residual: f64,
}

impl<T: Scalar> KerginInterpolant<T> {
    pub fn field(&self) -> &PolyVectorField<T> {
        &self.field
    }

    pub fn into_field(self) -> PolyVectorField<T> {
        self.field
    }

    /// The first component; the whole result for scalar interpolation.
    pub fn polynomial(&self) -> &Polynomial<T> {
        self.field.component(0)
    }

    /// The original `p`-point configuration (not augmented).
    pub fn config(&self) -> &PointConfiguration<T> {
        &self.config
    }

    /// 0 for the plain interpolant, `k ∈ 1..=p` for `Π^k`.
    pub fn augmented_index(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    /// Curl residual for gradient interpolants, Cauchy–Riemann residual for
    /// holomorphic ones, 0 otherwise.
    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }
}

impl<T: Scalar + Serialize> Serialize for KerginInterpolant<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct ConfigBlock<'a, T> {
            points: &'a [Vec<T>],
            #[serde(rename = "box")]
            bbox: &'a crate::BoxDomain,
            k: usize,
        }
        let mut st = s.serialize_struct("KerginInterpolant", 2)?;
        st.serialize_field("result", &self.field)?;
        st.serialize_field(
            "config",
            &ConfigBlock {
                points: self.config.points(),
                bbox: self.config.bbox(),
                k: self.k,
            },
        )?;
        st.end()
    }
}

fn target_config<T: Scalar>(
    config: &PointConfiguration<T>,
    k: usize,
) -> Result<PointConfiguration<T>> {
    if k == 0 {
        Ok(config.clone())
    } else {
        config.augmented(k)
    }
}

/// `Π_x f`, the Kergin interpolant of degree `p − 1` at `p` points.
pub fn kergin_scalar<T: Scalar, J: Jet<T> + ?Sized>(
    f: &J,
    config: &PointConfiguration<T>,
    opts: &KerginOptions,
) -> Result<KerginInterpolant<T>> {
    let stencil = KerginStencil::new(config, opts.exact_degree);
    let poly = stencil.apply_scalar(f)?;
    Ok(KerginInterpolant {
        field: PolyVectorField::new(vec![poly])?,
        config: config.clone(),
        k: 0,
        closure_residual: 0.0,
    })
}

/// Componentwise `Π_x F` (`k = 0`) or `Π^k_x F` (`k ∈ 1..=p`).
pub fn kergin_vector<T: Scalar, J: VectorJet<T> + ?Sized>(
    f: &J,
    config: &PointConfiguration<T>,
    k: usize,
    opts: &KerginOptions,
) -> Result<KerginInterpolant<T>> {
    let target = target_config(config, k)?;
    let stencil = KerginStencil::new(&target, opts.exact_degree);
    let field = stencil.apply_vector(f)?;
    Ok(KerginInterpolant {
        field,
        config: config.clone(),
        k,
        closure_residual: 0.0,
    })
}

/// `Π^k_x ∇f`, certified curl-free.
pub fn kergin_gradient<J: Jet<f64> + ?Sized>(
    f: &J,
    config: &PointConfiguration<f64>,
    k: usize,
    opts: &KerginOptions,
) -> Result<KerginInterpolant<f64>> {
    let mut out = kergin_vector(&Gradient(f), config, k, opts)?;
    let residual = out.field.curl_residual();
    if residual > CLOSURE_TOL * max_coeff(&out.field).max(1.0) {
        return Err(Error::CurlResidual(residual));
    }
    out.closure_residual = residual;
    Ok(out)
}

/// Holomorphic Kergin interpolation: the real Kergin interpolant of
/// `(Re F, Im F)` on `R^{2d}`, checked to satisfy the Cauchy–Riemann
/// equations coefficientwise and returned as a complex polynomial field.
pub fn kergin_holomorphic<J: VectorJet<Complex64> + ?Sized>(
    f: &J,
    config: &PointConfiguration<Complex64>,
    k: usize,
    opts: &KerginOptions,
) -> Result<KerginInterpolant<Complex64>> {
    let target = target_config(config, k)?;
    let d = config.dim();
    let real_points: Vec<Vec<f64>> = target.points().iter().map(|x| realify(x)).collect();
    let real_config = PointConfiguration::with_box(real_points, target.bbox().clone())?;
    let stencil = KerginStencil::new(&real_config, opts.exact_degree);
    let uv = stencil.apply_vector(&Realified { inner: f, dim: d })?;
    let (residual, field) = holomorphic_part(&uv, d)?;
    if residual > CLOSURE_TOL * max_coeff(&uv).max(1.0) {
        return Err(Error::CauchyRiemannResidual(residual));
    }
    Ok(KerginInterpolant {
        field,
        config: config.clone(),
        k,
        closure_residual: residual,
    })
}

/// Scalar convenience wrapper around [`kergin_holomorphic`].
pub fn kergin_holomorphic_scalar<J: Jet<Complex64>>(
    f: J,
    config: &PointConfiguration<Complex64>,
    k: usize,
    opts: &KerginOptions,
) -> Result<KerginInterpolant<Complex64>> {
    kergin_holomorphic(&Components(vec![f]), config, k, opts)
}

/// Largest Cauchy–Riemann defect of the pairs `(U_c, V_c)` and the complex
/// polynomials read off their `y`-free coefficients.
fn holomorphic_part(
    uv: &PolyVectorField<f64>,
    d: usize,
) -> Result<(f64, PolyVectorField<Complex64>)> {
    let degree = uv.degree();
    let mut residual = 0.0f64;
    let mut comps = Vec::new();
    for pair in uv.components().chunks(2) {
        let (u, v) = (&pair[0], &pair[1]);
        for j in 0..d {
            residual = residual.max(u.diff_var(j).max_coeff_diff(&v.diff_var(d + j)));
            residual = residual.max(u.diff_var(d + j).max_coeff_diff(&v.diff_var(j).scale(-1.0)));
        }
        let terms = enumerate_multiindices(d, degree).into_iter().map(|a| {
            let mut e = a.exponents().to_vec();
            e.resize(2 * d, 0);
            let full = MultiIndex::new(e);
            (a, Complex64::new(u.coeff(&full), v.coeff(&full)))
        });
        comps.push(Polynomial::from_terms(d, degree, terms)?);
    }
    Ok((residual, PolyVectorField::new(comps)?))
}

/// `(Re F_0, Im F_0, Re F_1, …)` as real functions on `R^{2d}`, using
/// `∂_x^a ∂_y^b F = i^{|b|} F^{(a+b)}` for holomorphic `F`.
struct Realified<'a, J: ?Sized> {
    inner: &'a J,
    dim: usize,
}

impl<J: VectorJet<Complex64> + ?Sized> VectorJet<f64> for Realified<'_, J> {
    fn dim(&self) -> usize {
        2 * self.dim
    }

    fn codim(&self) -> usize {
        2 * self.inner.codim()
    }

    fn order(&self) -> usize {
        self.inner.order()
    }

    fn jets(&self, x: &[f64], order: usize) -> Vec<Vec<f64>> {
        let d = self.dim;
        let z: Vec<Complex64> = (0..d).map(|j| Complex64::new(x[j], x[d + j])).collect();
        let complex = self.inner.jets(&z, order);
        let alphas = enumerate_multiindices(2 * d, order);
        let mut out = Vec::with_capacity(2 * complex.len());
        for cj in &complex {
            let vals: Vec<Complex64> = alphas
                .iter()
                .map(|ab| {
                    let e = ab.exponents();
                    let merged = MultiIndex::new((0..d).map(|j| e[j] + e[d + j]).collect());
                    let ib: usize = e[d..].iter().map(|&b| b as usize).sum();
                    cj[merged.rank()] * Complex64::i().powu(ib as u32)
                })
                .collect();
            out.push(vals.iter().map(|v| v.re).collect());
            out.push(vals.iter().map(|v| v.im).collect());
        }
        out
    }
}

fn max_coeff<T: Scalar>(g: &PolyVectorField<T>) -> f64 {
    g.components()
        .iter()
        .map(|c| c.max_coeff())
        .fold(0.0, f64::max)
}

/// Distances along a path of configurations converging to `limit`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuityProbe {
    /// Max coefficient distance between consecutive interpolants.
    pub successive: Vec<f64>,
    /// Max coefficient distance from each interpolant to the one at `limit`.
    pub to_limit: Vec<f64>,
}

/// Tracks `x ↦ Π_x f` along `path`; for a fully collapsed limit the limit
/// interpolant is the Taylor polynomial.
pub fn kergin_continuity_probe<J: Jet<f64> + ?Sized>(
    f: &J,
    path: &[PointConfiguration<f64>],
    limit: &PointConfiguration<f64>,
    opts: &KerginOptions,
) -> Result<ContinuityProbe> {
    let target = kergin_scalar(f, limit, opts)?;
    let interps = path
        .iter()
        .map(|c| kergin_scalar(f, c, opts))
        .collect::<Result<Vec<_>>>()?;
    let successive = interps
        .windows(2)
        .map(|w| w[0].polynomial().max_coeff_diff(w[1].polynomial()))
        .collect();
    let to_limit = interps
        .iter()
        .map(|i| i.polynomial().max_coeff_diff(target.polynomial()))
        .collect();
    Ok(ContinuityProbe {
        successive,
        to_limit,
    })
}
