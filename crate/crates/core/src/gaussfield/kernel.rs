use num_complex::Complex64;

use crate::polyalg::{binomial, factorial, MultiIndex};

/// Probabilists' Hermite polynomials `He_0(t), …, He_n(t)`.
pub fn hermite_table(t: f64, n: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(1.0);
    if n >= 1 {
        h.push(t);
    }
    for k in 1..n {
        h.push(t * h[k] - k as f64 * h[k - 1]);
    }
    h
}

/// `∂_x^α ∂_y^β e^{-|x-y|²/2}`.
///
/// With `t = x - y` each coordinate contributes `(-1)^{α_i} He_{α_i+β_i}(t_i) e^{-t_i²/2}`.
pub fn bf_kernel_derivatives(alpha: &MultiIndex, beta: &MultiIndex, x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 1.0;
    let mut sq = 0.0;
    for i in 0..x.len() {
        let t = x[i] - y[i];
        let (a, b) = (alpha.exponents()[i] as usize, beta.exponents()[i] as usize);
        let he = hermite_table(t, a + b)[a + b];
        acc *= if a % 2 == 0 { he } else { -he };
        sq += t * t;
    }
    acc * (-0.5 * sq).exp()
}

/// `∂_z^α ∂_{w̄}^β e^{z·w̄}`, the covariance `E[ψ^{(α)}(z) conj(ψ^{(β)}(w))]`
/// of the holomorphic series with unit complex coefficients.
pub fn holomorphic_kernel_derivatives(
    alpha: &MultiIndex,
    beta: &MultiIndex,
    z: &[Complex64],
    w: &[Complex64],
) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut lin = Complex64::new(0.0, 0.0);
    for i in 0..z.len() {
        let (a, b) = (alpha.exponents()[i] as usize, beta.exponents()[i] as usize);
        let wb = w[i].conj();
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..=a.min(b) {
            let c = (binomial(a, k) * binomial(b, k)) as f64 * factorial(k);
            s += c * wb.powu((a - k) as u32) * z[i].powu((b - k) as u32);
        }
        acc *= s;
        lin += z[i] * wb;
    }
    acc * lin.exp()
}
