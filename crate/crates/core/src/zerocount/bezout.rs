use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyalg::{PolyVectorField, Polynomial};
use crate::region::BoxDomain;

use super::count::{count_zeros, CountOptions};

/// Backward-error tolerance, relative to `Σ |a_k| |z|^k`, for accepting a
/// companion eigenvalue as a root.
pub const ROOT_CHECK_TOL: f64 = 1e-8;

/// All complex roots of a univariate polynomial, as eigenvalues of its
/// companion matrix. The list has length equal to the effective degree.
pub fn polynomial_roots(p: &Polynomial<f64>) -> Result<Vec<Complex64>> {
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: p.dim(),
        });
    }
    let n = p.effective_degree();
    let a = p.coeffs();
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = a[n];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -a[i] / lead;
    }
    Ok(companion.complex_eigenvalues().iter().copied().collect())
}

/// Relative backward error `|P(z)| / Σ |a_k| |z|^k`.
pub fn root_backward_error(p: &Polynomial<f64>, z: Complex64) -> f64 {
    let (mut value, mut scale) = (Complex64::new(0.0, 0.0), 0.0);
    for &c in p.coeffs().iter().rev() {
        value = value * z + c;
        scale = scale * z.norm() + c.abs();
    }
    if scale == 0.0 {
        0.0
    } else {
        value.norm() / scale
    }
}

/// Real zero count of a polynomial system against the Bezout bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BezoutCheck {
    /// Real zeros located in the search box.
    pub count: usize,
    /// `p^d` for `p` the largest component degree.
    pub bound: usize,
    pub ok: bool,
    /// For `d = 1`: number of companion eigenvalues passing the
    /// backward-error check.
    pub complex_count: Option<usize>,
    pub suspect: bool,
}

pub fn bezout_check(
    p: &PolyVectorField<f64>,
    bbox: &BoxDomain,
    opts: &CountOptions,
) -> Result<BezoutCheck> {
    let d = p.dim();
    let degree = p
        .components()
        .iter()
        .map(|c| c.effective_degree())
        .max()
        .unwrap_or(0);
    let bound = degree.pow(d as u32);
    let zeros = count_zeros(p, bbox, opts)?;
    let complex_count = if d == 1 {
        let poly = p.component(0);
        let roots = polynomial_roots(poly)?;
        Some(
            roots
                .iter()
                .filter(|&&z| root_backward_error(poly, z) <= ROOT_CHECK_TOL)
                .count(),
        )
    } else {
        None
    };
    Ok(BezoutCheck {
        count: zeros.count(),
        bound,
        ok: zeros.count() <= bound,
        complex_count,
        suspect: zeros.suspect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{fill_standard_normal, stream};

    fn random_poly(dim: usize, degree: usize, seed: u64, index: u64) -> Polynomial<f64> {
        let mut r = stream(seed, index);
        let mut c = vec![0.0; crate::polyalg::basis_len(dim, degree)];
        fill_standard_normal(&mut r, &mut c);
        Polynomial::from_coeffs(dim, degree, c).unwrap()
    }

    #[test]
    fn companion_roots_of_a_factored_polynomial() {
        let roots = [-2.0, 0.5, 3.0];
        let p = roots
            .iter()
            .fold(Polynomial::constant(1, 0, 2.0), |p, &r| p.mul_linear(0, r));
        let mut found: Vec<f64> = polynomial_roots(&p).unwrap().iter().map(|z| z.re).collect();
        found.sort_by(f64::total_cmp);
        for (a, b) in found.iter().zip(roots) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_univariate_polynomials_have_degree_many_roots() {
        for p in 1..=6 {
            for i in 0..20 {
                let poly = random_poly(1, p, 3, (p * 100 + i) as u64);
                let check = bezout_check(
                    &PolyVectorField::new(vec![poly]).unwrap(),
                    &BoxDomain::cube(1, -2.0, 2.0).unwrap(),
                    &CountOptions::default(),
                )
                .unwrap();
                assert_eq!(check.complex_count, Some(p));
                assert!(check.ok);
            }
        }
    }

    #[test]
    fn real_counts_match_companion_real_roots() {
        let bbox = BoxDomain::cube(1, -1.0, 1.0).unwrap();
        for i in 0..30 {
            let poly = random_poly(1, 5, 11, i);
            let expected = polynomial_roots(&poly)
                .unwrap()
                .iter()
                .filter(|z| z.im.abs() < 1e-9 && z.re.abs() < 1.0 - 1e-6)
                .count();
            let f = PolyVectorField::new(vec![poly]).unwrap();
            assert_eq!(
                count_zeros(&f, &bbox, &CountOptions::default())
                    .unwrap()
                    .count(),
                expected,
                "draw {i}"
            );
        }
    }

    #[test]
    fn quadratic_pairs_respect_the_bound() {
        let bbox = BoxDomain::cube(2, -2.0, 2.0).unwrap();
        for i in 0..100 {
            let f = PolyVectorField::new(vec![
                random_poly(2, 2, 5, 2 * i),
                random_poly(2, 2, 5, 2 * i + 1),
            ])
            .unwrap();
            let check = bezout_check(
                &f,
                &bbox,
                &CountOptions::default().with_resolution(1.0 / 16.0),
            )
            .unwrap();
            assert_eq!(check.bound, 4);
            assert!(check.ok, "draw {i}: {} zeros", check.count);
            assert_eq!(check.complex_count, None);
        }
    }

    #[test]
    fn unit_component_gives_no_zeros() {
        let f = PolyVectorField::new(vec![
            random_poly(2, 3, 1, 0),
            Polynomial::constant(2, 3, 1.0),
        ])
        .unwrap();
        let check = bezout_check(
            &f,
            &BoxDomain::cube(2, -1.0, 1.0).unwrap(),
            &CountOptions::default(),
        )
        .unwrap();
        assert_eq!(check.count, 0);
        assert_eq!(check.bound, 9);
        assert!(check.ok);
    }
}
