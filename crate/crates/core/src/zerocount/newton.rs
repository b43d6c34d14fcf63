use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::kergin::VectorJet;
use crate::region::BoxDomain;

/// Damped Newton parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Residual tolerance relative to `1 + field scale`.
    pub tol: f64,
    /// Zeros closer than this are merged; defaults to `1e-6 · diam(box)`.
    pub dedupe_radius: Option<f64>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iter: 50,
            tol: 1e-10,
            dedupe_radius: None,
        }
    }
}

/// A Jacobian whose smallest singular value is below this fraction of the
/// field's Jacobian scale is reported as near-singular.
pub const NEAR_SINGULAR_RATIO: f64 = 1e-6;

const MAX_HALVINGS: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Root {
    pub x: Vec<f64>,
    pub residual: f64,
    pub near_singular: bool,
}

fn residual_and_jacobian<F: VectorJet<f64> + ?Sized>(
    f: &F,
    x: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let d = x.len();
    let jets = f.jets(x, 1);
    let value = DVector::from_iterator(jets.len(), jets.iter().map(|j| j[0]));
    let jac = DMatrix::from_fn(jets.len(), d, |i, v| jets[i][1 + v]);
    (value, jac)
}

fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn is_near_singular(jac: &DMatrix<f64>, jac_scale: f64) -> bool {
    let sv = jac.clone().singular_values();
    let scale = sv.max().max(jac_scale);
    !(scale > 0.0) || sv.min() < NEAR_SINGULAR_RATIO * scale
}

/// Damped Newton from `x0`. Fails on a singular Jacobian, on leaving the box
/// enlarged by half its widths, or without convergence in `max_iter` steps.
pub(crate) fn newton<F: VectorJet<f64> + ?Sized>(
    f: &F,
    x0: &[f64],
    bbox: &BoxDomain,
    threshold: f64,
    max_iter: usize,
    jac_scale: f64,
) -> Option<Root> {
    let margin = 0.5 * bbox.widths().iter().fold(0.0, |m: f64, w| m.max(*w));
    let mut x = DVector::from_column_slice(x0);
    let (mut value, mut jac) = residual_and_jacobian(f, x.as_slice());
    let mut res = sup_norm(&value);
    for _ in 0..=max_iter {
        if res <= threshold {
            // One more full step polishes the point without risking the bound.
            if let Some(step) = jac.clone().lu().solve(&value) {
                let y = &x - step;
                let (v2, j2) = residual_and_jacobian(f, y.as_slice());
                if sup_norm(&v2) <= res {
                    x = y;
                    value = v2;
                    jac = j2;
                    res = sup_norm(&value);
                }
            }
            return Some(Root {
                x: x.as_slice().to_vec(),
                residual: res,
                near_singular: is_near_singular(&jac, jac_scale),
            });
        }
        let step = jac.clone().lu().solve(&value)?;
        if !step.iter().all(|s| s.is_finite()) {
            return None;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let y = &x - t * &step;
            let (v2, j2) = residual_and_jacobian(f, y.as_slice());
            let r2 = sup_norm(&v2);
            if r2 < res {
                x = y;
                value = v2;
                jac = j2;
                res = r2;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || !bbox.contains_with_margin(x.as_slice(), margin) {
            return None;
        }
    }
    None
}

/// Root of a scalar function bracketed by a sign change on `[a, b]`, by
/// Newton steps safeguarded with bisection. Always returns a point of the
/// bracket.
pub(crate) fn bracketed_root<F: VectorJet<f64> + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    threshold: f64,
    max_iter: usize,
    jac_scale: f64,
) -> Root {
    let eval = |x: f64| {
        let j = f.jets(&[x], 1);
        (j[0][0], j[0][1])
    };
    let (fa, _) = eval(a);
    let (mut lo, mut hi) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut x = 0.5 * (a + b);
    let (mut fx, mut dfx) = eval(x);
    // Bisection halves the bracket, so this bound always terminates.
    for _ in 0..(max_iter + 200) {
        if fx.abs() <= threshold || (hi - lo).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let inside = newton.is_finite() && (newton - lo) * (newton - hi) < 0.0;
        x = if inside { newton } else { 0.5 * (lo + hi) };
        (fx, dfx) = eval(x);
    }
    let near_singular = is_near_singular(&DMatrix::from_element(1, 1, dfx), jac_scale);
    Root {
        x: vec![x],
        residual: fx.abs(),
        near_singular,
    }
}
