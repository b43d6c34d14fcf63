use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::polyalg::{basis_len, enumerate_multiindices, MultiIndex, Polynomial};
use crate::rng::{stream, StreamRng};

use super::config::PointConfiguration;
use super::interpolate::{
    kergin_gradient, kergin_holomorphic_scalar, kergin_scalar, KerginOptions,
};
use super::jet::{FnJet, Jet};

/// Cubature exactness used when the input is not polynomial.
const SMOOTH_EXACT_DEGREE: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteCheck {
    /// Interpolating a polynomial of degree `p − 1` returns it.
    Reproduction,
    /// `d = 1`, distinct nodes, against a Vandermonde solve.
    Lagrange,
    /// `d = 1`, a repeated node, against a confluent Vandermonde solve.
    Hermite,
    /// Fully collapsed configuration against the Taylor polynomial.
    TaylorLimit,
    /// Curl residual of a gradient interpolant.
    Curl,
    /// Cauchy–Riemann residual of a holomorphic interpolant.
    CauchyRiemann,
}

impl SuiteCheck {
    pub const ALL: [SuiteCheck; 6] = [
        SuiteCheck::Reproduction,
        SuiteCheck::Lagrange,
        SuiteCheck::Hermite,
        SuiteCheck::TaylorLimit,
        SuiteCheck::Curl,
        SuiteCheck::CauchyRiemann,
    ];

    pub fn tolerance(self) -> f64 {
        match self {
            SuiteCheck::Reproduction => 1e-10,
            _ => 1e-8,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SuiteCheck::Reproduction => "reproduction",
            SuiteCheck::Lagrange => "lagrange",
            SuiteCheck::Hermite => "hermite",
            SuiteCheck::TaylorLimit => "taylor-limit",
            SuiteCheck::Curl => "curl",
            SuiteCheck::CauchyRiemann => "cauchy-riemann",
        }
    }
}

impl fmt::Display for SuiteCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One check of one random case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub case: usize,
    pub check: SuiteCheck,
    /// Real dimension for real checks, complex dimension for
    /// [`SuiteCheck::CauchyRiemann`].
    pub dim: usize,
    pub p: usize,
    pub error: f64,
}

impl SuiteRecord {
    pub fn passed(&self) -> bool {
        self.error <= self.check.tolerance()
    }
}

/// Runs `cases` random Kergin cases with `d ∈ 1..=3` and `p ∈ 1..=4`.
///
/// Case `i` draws from the stream `(seed, i)` and produces a reproduction,
/// Taylor-limit and curl record, Lagrange and Hermite records when `d = 1`,
/// and a Cauchy–Riemann record in complex dimension 1 or 2.
pub fn kergin_suite(cases: usize, seed: u64, execution: Execution) -> Result<Vec<SuiteRecord>> {
    let per_case = execution.map(cases, |i| run_case(i, seed));
    let mut out = Vec::new();
    for records in per_case {
        out.extend(records?);
    }
    Ok(out)
}

fn run_case(case: usize, seed: u64) -> Result<Vec<SuiteRecord>> {
    let mut rng = stream(seed, case as u64);
    let d = 1 + case % 3;
    let p = 1 + (case / 3) % 4;
    let record = |check, dim, error| SuiteRecord {
        case,
        check,
        dim,
        p,
        error,
    };
    let mut out = Vec::new();

    let f = random_poly(&mut rng, d, p - 1);
    let mut pts = random_points(&mut rng, d, p);
    if p >= 2 && case % 2 == 1 {
        pts[p - 1] = pts[0].clone();
    }
    let config = PointConfiguration::new(pts)?;
    let got = kergin_scalar(&f, &config, &KerginOptions::default())?;
    out.push(record(
        SuiteCheck::Reproduction,
        d,
        got.polynomial().max_coeff_diff(&f),
    ));

    let c = random_vec(&mut rng, d);
    let g = exp_jet(c.clone(), p + 2);
    let x = random_vec(&mut rng, d);
    let collapsed = PointConfiguration::new(vec![x.clone(); p])?;
    let got = kergin_scalar(&g, &collapsed, &KerginOptions::default())?;
    out.push(record(
        SuiteCheck::TaylorLimit,
        d,
        got.polynomial().max_coeff_diff(&taylor(&g, &x, p - 1)),
    ));

    if d == 1 {
        let smooth = KerginOptions {
            exact_degree: Some(SMOOTH_EXACT_DEGREE),
        };
        let nodes = distinct_nodes(&mut rng, p);
        out.push(record(
            SuiteCheck::Lagrange,
            1,
            confluent_error(&g, &nodes, &smooth)?,
        ));
        if p >= 2 {
            let mut nodes = distinct_nodes(&mut rng, p);
            nodes[p - 1] = nodes[0];
            out.push(record(
                SuiteCheck::Hermite,
                1,
                confluent_error(&g, &nodes, &smooth)?,
            ));
        }
    }

    let k = rng.random_range(0..=p);
    let config = PointConfiguration::new(random_points(&mut rng, d, p))?;
    let curl = match kergin_gradient(&exp_jet(c, p + 3), &config, k, &KerginOptions::default()) {
        Ok(out) => out.closure_residual(),
        Err(Error::CurlResidual(r)) => r,
        Err(e) => return Err(e),
    };
    out.push(record(SuiteCheck::Curl, d, curl));

    let dc = 1 + case % 2;
    let pc = 1 + (case / 2) % 3;
    let kc = rng.random_range(0..=pc);
    let cz: Vec<Complex64> = (0..dc)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let zs: Vec<Vec<Complex64>> = (0..pc)
        .map(|_| {
            (0..dc)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let cr = match kergin_holomorphic_scalar(
        complex_exp_jet(cz, pc + 2),
        &PointConfiguration::new(zs)?,
        kc,
        &KerginOptions::default(),
    ) {
        Ok(out) => out.closure_residual(),
        Err(Error::CauchyRiemannResidual(r)) => r,
        Err(e) => return Err(e),
    };
    out.push(SuiteRecord {
        case,
        check: SuiteCheck::CauchyRiemann,
        dim: dc,
        p: pc,
        error: cr,
    });
    Ok(out)
}

fn random_vec(rng: &mut StreamRng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn random_points(rng: &mut StreamRng, d: usize, p: usize) -> Vec<Vec<f64>> {
    (0..p).map(|_| random_vec(rng, d)).collect()
}

fn random_poly(rng: &mut StreamRng, d: usize, degree: usize) -> Polynomial<f64> {
    let coeffs = random_vec(rng, basis_len(d, degree));
    Polynomial::from_coeffs(d, degree, coeffs).expect("coefficient count matches the basis")
}

/// Nodes in `[-1, 1]` at least `0.1` apart.
fn distinct_nodes(rng: &mut StreamRng, p: usize) -> Vec<f64> {
    let mut nodes: Vec<f64> = Vec::with_capacity(p);
    while nodes.len() < p {
        let t = rng.random_range(-1.0..1.0);
        if nodes.iter().all(|&s| (s - t).abs() >= 0.1) {
            nodes.push(t);
        }
    }
    nodes
}

/// `∂^α exp(c · x)`.
fn exp_jet(c: Vec<f64>, order: usize) -> FnJet<impl Fn(&MultiIndex, &[f64]) -> f64 + Sync> {
    let d = c.len();
    FnJet::new(d, order, move |a: &MultiIndex, x: &[f64]| {
        let lin: f64 = c.iter().zip(x).map(|(ci, xi)| ci * xi).sum();
        a.pow(&c) * lin.exp()
    })
}

fn complex_exp_jet(
    c: Vec<Complex64>,
    order: usize,
) -> FnJet<impl Fn(&MultiIndex, &[Complex64]) -> Complex64 + Sync> {
    let d = c.len();
    FnJet::new(d, order, move |a: &MultiIndex, z: &[Complex64]| {
        let lin: Complex64 = c.iter().zip(z).map(|(ci, zi)| ci * zi).sum();
        a.pow(&c) * lin.exp()
    })
}

/// Taylor polynomial of degree `n` about `x`, expanded in monomials.
fn taylor<J: Jet<f64>>(f: &J, x: &[f64], n: usize) -> Polynomial<f64> {
    let d = x.len();
    let mut out = Polynomial::zero(d, n);
    for alpha in enumerate_multiindices(d, n) {
        let mut term = Polynomial::constant(d, 0, f.derivative(&alpha, x) / alpha.factorial());
        for (v, &e) in alpha.exponents().iter().enumerate() {
            for _ in 0..e {
                term = term.mul_linear(v, x[v]);
            }
        }
        out = out.add(&term);
    }
    out
}

/// Coefficient distance between the Kergin interpolant at `nodes` and the
/// Hermite interpolant from a confluent Vandermonde solve. A node repeated
/// `m` times contributes value and derivatives up to order `m − 1`.
fn confluent_error<J: Jet<f64>>(f: &J, nodes: &[f64], opts: &KerginOptions) -> Result<f64> {
    let p = nodes.len();
    let mut rows = Vec::with_capacity(p * p);
    let mut rhs = Vec::with_capacity(p);
    for (i, &t) in nodes.iter().enumerate() {
        let order = nodes[..i].iter().filter(|&&s| s == t).count();
        for j in 0..p {
            rows.push(if j < order {
                0.0
            } else {
                falling(j, order) * t.powi((j - order) as i32)
            });
        }
        rhs.push(f.derivative(&MultiIndex::new(vec![order as u32]), &[t]));
    }
    let v = DMatrix::from_row_slice(p, p, &rows);
    let coeffs = v
        .lu()
        .solve(&DVector::from_vec(rhs))
        .ok_or_else(|| Error::InvalidArgument("singular confluent Vandermonde".into()))?;
    let config = PointConfiguration::new(nodes.iter().map(|&t| vec![t]).collect())?;
    let got = kergin_scalar(f, &config, opts)?;
    Ok((0..p)
        .map(|j| (got.polynomial().coeff(&MultiIndex::new(vec![j as u32])) - coeffs[j]).abs())
        .fold(0.0, f64::max))
}

/// `j (j − 1) … (j − k + 1)`.
fn falling(j: usize, k: usize) -> f64 {
    (0..k).map(|i| (j - i) as f64).product()
}
