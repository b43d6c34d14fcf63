use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::*;
use crate::error::Error;
use crate::gaussfield::{BargmannFock, ComplexBargmannFock, GradientModel, ProductOfIndependents};
use crate::kergin::PointConfiguration;
use crate::polyalg::{binomial, MultiIndex, PolySpace, PolyVectorField, Polynomial};
use crate::region::BoxDomain;

fn config(points: &[&[f64]]) -> PointConfiguration {
    PointConfiguration::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
}

fn opts(samples: usize, seed: u64) -> KacOptions {
    KacOptions::default().with_samples(samples).with_seed(seed)
}

#[test]
fn frame_factorises_and_is_orthonormal() {
    let v0 = PolySpace::full(2, 2);
    let c = config(&[&[0.1, -0.3], &[0.7, 0.2], &[-0.5, 0.6]]);
    let f = evaluation_frame(&v0, &c).unwrap();
    assert_eq!(f.e.shape(), (6, v0.dim()));
    assert!((&f.a * &f.d - &f.e).abs().max() < 1e-10);
    assert!(
        (&f.d * f.d.transpose() - DMatrix::identity(6, 6))
            .abs()
            .max()
            < 1e-10
    );
    for i in 0..6 {
        assert!(f.a[(i, i)] > 0.0);
        for j in i + 1..6 {
            assert_eq!(f.a[(i, j)], 0.0);
        }
    }
    let diag: f64 = f.a.diagonal().iter().product();
    assert_eq!(f.det_a, diag);
}

#[test]
fn single_point_frame_is_one_gram_schmidt_step() {
    let v0 = PolySpace::full(1, 2);
    let c = config(&[&[0.4]]);
    let f = evaluation_frame(&v0, &c).unwrap();
    assert!((f.a[(0, 0)] - f.e.row(0).norm()).abs() < 1e-14);
    assert!((f.d.row(0) - f.e.row(0) / f.e.row(0).norm()).abs().max() < 1e-14);
}

#[test]
fn frame_determinant_matches_vandermonde() {
    // V_0 = P_{p-1} on the line, basis x^j / ‖x^j‖ with ‖x^j‖² = 1 / C(p-1, j).
    let xs = [-0.9, -0.2, 0.35, 0.8];
    let p = xs.len();
    let v0 = PolySpace::full(1, p - 1);
    let pts: Vec<&[f64]> = xs.iter().map(std::slice::from_ref).collect();
    let f = evaluation_frame(&v0, &config(&pts)).unwrap();
    let mut expected = 1.0;
    for j in 0..p {
        expected *= (binomial(p - 1, j) as f64).sqrt();
        for i in 0..j {
            expected *= (xs[j] - xs[i]).abs();
        }
    }
    assert!((f.det_a.abs() - expected).abs() < 1e-10 * expected);
    let qr = f.e.transpose().qr();
    let r_det: f64 = qr.r().diagonal().iter().product();
    assert!((f.det_a.abs() - r_det.abs()).abs() < 1e-10 * expected);
}

#[test]
fn frame_determinant_is_invariant_under_relabelling() {
    for v0 in [PolySpace::full(2, 1), PolySpace::gradient(2, 1)] {
        let c = config(&[&[0.1, -0.3], &[0.7, 0.2]]);
        let a = evaluation_frame(&v0, &c).unwrap().det_a.abs();
        let b = evaluation_frame(&v0, &c.permuted(&[1, 0]).unwrap())
            .unwrap()
            .det_a
            .abs();
        assert!((a - b).abs() < 1e-10 * a);
    }
}

#[test]
fn frame_rejects_coincident_points() {
    let c = config(&[&[0.2, 0.2], &[0.2, 0.2]]);
    assert!(matches!(
        evaluation_frame(&PolySpace::full(2, 1), &c),
        Err(Error::DiagonalDegeneracy(_))
    ));
}

#[test]
fn lambda_matches_one_dimensional_closed_form() {
    // V = P_1 with orthonormal basis {1, x}; on Ker δ_y the derivative of
    // the projection of ξ_0 + ξ_1 x is (ξ_1 − y ξ_0)/(1 + y²).
    let v = PolySpace::full(1, 1);
    let y = 0.6;
    let h = jacobian_functional(&v, &config(&[&[y]]), 1, &LambdaOptions::default()).unwrap();
    let exact = 1.0 / (1.0f64 + y * y).sqrt();
    assert!(
        (h.lambda() - exact).abs() < 4.0 * h.lambda_se(),
        "{} vs {exact}",
        h.lambda()
    );
}

/// `E[Π X_i]` for a centred Gaussian vector via the sum over pairings.
fn wick(cov: &DMatrix<f64>, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let rest = &idx[1..];
    let mut total = 0.0;
    for j in 0..rest.len() {
        let mut others = rest.to_vec();
        let partner = others.remove(j);
        total += cov[(first, partner)] * wick(cov, &others);
    }
    total
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    if n == 1 {
        return vec![(vec![0], 1.0)];
    }
    let mut out = Vec::new();
    for (perm, sign) in permutations(n - 1) {
        for pos in 0..n {
            let mut p = perm.clone();
            p.insert(pos, n - 1);
            let s = if (n - 1 - pos).is_multiple_of(2) {
                sign
            } else {
                -sign
            };
            out.push((p, s));
        }
    }
    out
}

#[test]
fn lambda_matches_wick_moment() {
    for (v, c) in [
        (PolySpace::full(2, 2), config(&[&[0.1, -0.3], &[0.7, 0.2]])),
        (
            PolySpace::gradient(2, 2),
            config(&[&[0.0, 0.5], &[-0.4, -0.1]]),
        ),
    ] {
        let d = 2;
        let opts = LambdaOptions {
            samples: 20_000,
            ..LambdaOptions::default()
        };
        let h = jacobian_functional(&v, &c, 2, &opts).unwrap();
        let cov = h.map() * h.map().transpose();
        let perms = permutations(d);
        let mut second_moment = 0.0;
        for (s, ss) in &perms {
            for (t, st) in &perms {
                let idx: Vec<usize> = (0..d)
                    .map(|i| i * d + s[i])
                    .chain((0..d).map(|i| i * d + t[i]))
                    .collect();
                second_moment += ss * st * wick(&cov, &idx);
            }
        }
        let exact = second_moment.sqrt();
        assert!(
            (h.lambda() - exact).abs() < 4.0 * h.lambda_se(),
            "{} vs {exact}",
            h.lambda()
        );
    }
}

#[test]
fn lambda_is_deterministic_and_homogeneous() {
    let v = PolySpace::full(2, 2);
    let c = config(&[&[0.1, -0.3], &[0.7, 0.2]]);
    let o = LambdaOptions::default();
    let a = lambda_norm(&v, &c, 1, &o).unwrap();
    assert_eq!(a.to_bits(), lambda_norm(&v, &c, 1, &o).unwrap().to_bits());
    let scale = 2.25;
    let b = lambda_norm(
        &v,
        &c,
        1,
        &LambdaOptions {
            inner_product_scale: scale,
            ..o
        },
    )
    .unwrap();
    assert!((b - a * scale.sqrt().powi(-2)).abs() < 1e-12 * a);
}

#[test]
fn h_is_homogeneous_of_degree_d() {
    let v = PolySpace::full(2, 2);
    let c = config(&[&[0.1, -0.3], &[0.7, 0.2]]);
    let h = jacobian_functional(&v, &c, 1, &LambdaOptions::default()).unwrap();
    let g = DVector::from_fn(v.dim(), |i, _| ((i * 7 % 5) as f64 - 2.0) / 3.0);
    let t = -1.7;
    assert!((h.h(&(&g * t)) - t * t * h.h(&g)).abs() < 1e-12 * h.h(&g).abs().max(1.0));
}

#[test]
fn h_recovers_the_jacobian_on_the_kernel() {
    // A field in Ker δ_y is left unchanged by the projection, so h·λ is its
    // Jacobian determinant at y_k.
    let v = PolySpace::full(2, 2);
    let c = config(&[&[0.1, -0.3], &[0.7, 0.2]]);
    let h = jacobian_functional(&v, &c, 2, &LambdaOptions::default()).unwrap();
    // G_0 = (z_0 − y_{1,0})(z_0 − y_{2,0}), G_1 = ℓ(z)(z_1 − y_{2,1}) with
    // ℓ affine and ℓ(y_1) = 0: both components vanish at y_1 and y_2.
    let (y1, y2) = (c.point(0), c.point(1));
    let one = Polynomial::constant(2, 0, 1.0);
    let g0 = one.mul_linear(0, y1[0]).mul_linear(0, y2[0]);
    let ell = Polynomial::from_terms(
        2,
        1,
        [
            (MultiIndex::zero(2), -y1[0] - 2.0 * y1[1]),
            (MultiIndex::unit(2, 0), 1.0),
            (MultiIndex::unit(2, 1), 2.0),
        ],
    )
    .unwrap();
    let g1 = ell.mul_linear(1, y2[1]);
    let g = PolyVectorField::new(vec![g0, g1]).unwrap();
    assert!(g.eval(y2).unwrap().iter().all(|x| x.abs() < 1e-14));
    let expected = g.jacobian_det(y2).unwrap();
    let got = h.h_field(&v, &g).unwrap() * h.lambda();
    assert!(
        (got - expected).abs() < 1e-10 * expected.abs().max(1.0),
        "{got} vs {expected}"
    );
}

#[test]
fn zero_density_on_the_line_is_one_over_pi() {
    let model = BargmannFock::new(1);
    for y in [0.0, 2.5] {
        let dens = kac_density_direct(&model, &config(&[&[y]]), &opts(20_000, 3)).unwrap();
        assert!(
            (dens.rho - 1.0 / PI).abs() < 3.0 * dens.rho_se,
            "{} ± {}",
            dens.rho,
            dens.rho_se
        );
    }
}

#[test]
fn critical_point_density_on_the_line_is_sqrt3_over_pi() {
    let model = GradientModel::new(BargmannFock::new(1));
    let dens = kac_density_direct(&model, &config(&[&[0.3]]), &opts(20_000, 4)).unwrap();
    let exact = 3f64.sqrt() / PI;
    assert!(
        (dens.rho - exact).abs() < 3.0 * dens.rho_se,
        "{} ± {}",
        dens.rho,
        dens.rho_se
    );
}

#[test]
fn planar_density_is_stationary() {
    let model = ProductOfIndependents::new(2, 2);
    let a = kac_density_direct(&model, &config(&[&[-0.8, 0.3]]), &opts(20_000, 5)).unwrap();
    let b = kac_density_direct(&model, &config(&[&[0.9, -0.5]]), &opts(20_000, 6)).unwrap();
    let se = (a.rho_se.powi(2) + b.rho_se.powi(2)).sqrt();
    assert!((a.rho - b.rho).abs() < 3.0 * se);
}

#[test]
fn coincident_points_are_degenerate() {
    let model = ProductOfIndependents::new(2, 2);
    let err = kac_density_direct(&model, &config(&[&[0.1, 0.1], &[0.1, 0.1]]), &opts(100, 0))
        .unwrap_err();
    assert!(err.is_degeneracy(), "{err}");
}

#[test]
fn factorisation_identity_holds() {
    let vector1 = ProductOfIndependents::new(1, 1);
    let vector2 = ProductOfIndependents::new(2, 2);
    let grad2 = GradientModel::new(BargmannFock::new(2));
    let cases: Vec<(
        Box<dyn crate::gaussfield::GaussianFieldModel>,
        SpacePair,
        PointConfiguration,
    )> = vec![
        (
            Box::new(vector1),
            SpacePair::vector(1, 2),
            config(&[&[-0.3], &[0.5]]),
        ),
        (
            Box::new(vector1),
            SpacePair::vector(1, 3),
            config(&[&[-0.3], &[0.5], &[0.1]]),
        ),
        (
            Box::new(vector2),
            SpacePair::vector(2, 2),
            config(&[&[0.1, -0.3], &[0.7, 0.2]]),
        ),
        (
            Box::new(grad2),
            SpacePair::gradient(2, 2),
            config(&[&[0.1, -0.3], &[0.4, 0.2]]),
        ),
    ];
    for (i, (model, spaces, c)) in cases.iter().enumerate() {
        let f = kac_factorization(model.as_ref(), spaces, c, &opts(20_000, 10 + i as u64)).unwrap();
        assert!(
            f.identity_holds(3.0),
            "case {i}: rho {} R·sigma {} se {}",
            f.rho,
            f.r * f.sigma,
            f.combined_se
        );
        assert!(f.identity_gap() <= 3.0 * f.mc_error() * f.r + 3.0 * f.rho_se);
        assert!(f.rho > 0.0 && f.sigma > 0.0 && f.r > 0.0);
    }
}

#[test]
fn single_point_factorisation_is_exact() {
    let model = ProductOfIndependents::new(2, 2);
    let f = kac_factorization(
        &model,
        &SpacePair::vector(2, 1),
        &config(&[&[0.3, -0.2]]),
        &opts(4000, 1),
    )
    .unwrap();
    assert!(
        (f.rho - f.r * f.sigma).abs() < 1e-8 * f.rho,
        "{} vs {}",
        f.rho,
        f.r * f.sigma
    );
}

#[test]
fn densities_differ_by_det_a() {
    let model = ProductOfIndependents::new(2, 2);
    let c = config(&[&[0.1, -0.3], &[0.7, 0.2]]);
    let f = kac_factorization(&model, &SpacePair::vector(2, 2), &c, &opts(1000, 2)).unwrap();
    assert!((f.psi_delta * f.det_a.abs() - f.psi_d).abs() < 1e-8 * f.psi_d);
}

#[test]
fn r_depends_only_on_spaces_and_points() {
    let spaces = SpacePair::vector(2, 2);
    let c = config(&[&[0.1, -0.3], &[0.7, 0.2]]);
    let a = kac_factorization(
        &ProductOfIndependents::new(2, 2),
        &spaces,
        &c,
        &opts(500, 1),
    )
    .unwrap();
    let b = kac_factorization(
        &GradientModel::new(BargmannFock::new(2)),
        &spaces,
        &c,
        &opts(500, 2),
    )
    .unwrap();
    assert_eq!(a.r.to_bits(), b.r.to_bits());
    assert_eq!(
        a.r.to_bits(),
        r_factor(&spaces, &c, &LambdaOptions::default())
            .unwrap()
            .to_bits()
    );
}

#[test]
fn estimates_are_invariant_under_relabelling() {
    let model = ProductOfIndependents::new(2, 2);
    let spaces = SpacePair::vector(2, 2);
    let c = config(&[&[0.7, 0.2], &[0.1, -0.3]]);
    let swapped = c.permuted(&[1, 0]).unwrap();
    let a = kac_factorization(&model, &spaces, &c, &opts(2000, 7)).unwrap();
    let b = kac_factorization(&model, &spaces, &swapped, &opts(2000, 7)).unwrap();
    assert!((a.rho - b.rho).abs() <= 1e-8 * a.rho);
    assert!((a.r - b.r).abs() <= 1e-8 * a.r);
    let da = kac_density_direct(&model, &c, &opts(2000, 7)).unwrap();
    let db = kac_density_direct(&model, &swapped, &opts(2000, 7)).unwrap();
    assert!((da.rho - db.rho).abs() <= 1e-8 * da.rho);
}

#[test]
fn complex_fields_are_not_factorised() {
    let model = ComplexBargmannFock::new(1, 1);
    let c = config(&[&[0.1, 0.2]]);
    assert!(matches!(
        kac_factorization(&model, &SpacePair::vector(2, 1), &c, &opts(100, 0)),
        Err(Error::Unsupported(_))
    ));
    assert!(matches!(
        SpacePair::new(crate::polyalg::SpaceKind::FullComplex, 1, 2),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn estimates_do_not_depend_on_execution() {
    let model = ProductOfIndependents::new(2, 2);
    let c = config(&[&[0.7, 0.2], &[0.1, -0.3]]);
    let seq = kac_density_direct(
        &model,
        &c,
        &opts(3000, 9).with_execution(crate::exec::Execution::Sequential),
    )
    .unwrap();
    let par = kac_density_direct(
        &model,
        &c,
        &opts(3000, 9).with_execution(crate::exec::Execution::Parallel),
    )
    .unwrap();
    assert_eq!(seq, par);
}

#[test]
fn stirling_numbers_and_poisson_moments() {
    assert_eq!(stirling2(0, 0), 1.0);
    assert_eq!(stirling2(4, 2), 7.0);
    assert_eq!(stirling2(5, 3), 25.0);
    assert_eq!(stirling2(3, 0), 0.0);
    // Factorial moments of Poisson(μ) are μ^j; compare with direct sums.
    let mu: f64 = 1.3;
    let fact: Vec<f64> = (1..=4).map(|j| mu.powi(j)).collect();
    let raw = raw_moments(&fact);
    for (p, r) in raw.iter().enumerate() {
        let mut pmf = (-mu).exp();
        let mut direct = 0.0;
        for n in 0..80 {
            if n > 0 {
                pmf *= mu / n as f64;
            }
            direct += pmf * (n as f64).powi(p as i32 + 1);
        }
        assert!((r - direct).abs() < 1e-10 * direct);
    }
    assert_eq!(factorial_power(5.0, 3), 60.0);
    assert_eq!(factorial_power(2.0, 3), 0.0);
}

#[test]
fn first_factorial_moments_on_an_interval() {
    let bbox = BoxDomain::from_intervals(&[(0.0, 3.0)]).unwrap();
    let integ = MomentIntegration {
        points: 200,
        inner_samples: 2000,
        seed: 8,
        ..MomentIntegration::default()
    };
    let zeros = factorial_moment(&BargmannFock::new(1), &bbox, 1, &integ).unwrap();
    assert!(
        (zeros.estimate - 3.0 / PI).abs() < 3.0 * zeros.stderr,
        "{zeros:?}"
    );
    let crit =
        factorial_moment(&GradientModel::new(BargmannFock::new(1)), &bbox, 1, &integ).unwrap();
    assert!(
        (crit.estimate - 3.0 * 3f64.sqrt() / PI).abs() < 3.0 * crit.stderr,
        "{crit:?}"
    );
}

#[test]
fn near_diagonal_slope_on_the_line() {
    let fit = near_diagonal_exponent(
        &BargmannFock::new(1),
        &[0.0],
        &[1.0],
        &log_spaced(1e-3, 1.0, 12),
        &opts(4000, 12),
    )
    .unwrap();
    assert_eq!(fit.eps.len(), 12);
    assert!((fit.slope - 1.0).abs() <= 0.2, "{fit:?}");
}

#[test]
fn single_point_probe_moves_with_r_only() {
    // For p = 1, A = I and R = λ(y); the Bombieri product is not
    // translation invariant, so σ = ρ / λ(y) follows λ while ρ stays put.
    let path = collapse_path(&[0.0, 0.0], &[vec![1.0, -0.5]], &[0.0, 0.5, 1.0]).unwrap();
    let probe = sigma_boundedness_probe(
        &ProductOfIndependents::new(2, 2),
        &SpacePair::vector(2, 1),
        &path,
        &opts(4000, 13),
    )
    .unwrap();
    assert_eq!(probe.sigma_slope, None);
    for i in 1..3 {
        let se = probe.sigma_se[0] * probe.r[0] + probe.sigma_se[i] * probe.r[i];
        assert!((probe.rho[i] - probe.rho[0]).abs() < 3.0 * se);
        assert!((probe.r[i] * probe.sigma[i] - probe.rho[i]).abs() < 1e-8 * probe.rho[i]);
    }
}
