//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line
//! with the measured value, its tolerance and the runtime; the process
//! exits nonzero when any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use critmoments::exec::Execution;
use critmoments::gaussfield::{
    BargmannFock, GaussianFieldModel, GradientModel, ProductOfIndependents,
};
use critmoments::kacrice::{
    collapse_path, factorial_moment, kac_factorization, log_spaced, near_diagonal_exponent,
    sigma_boundedness_probe, KacOptions, MomentIntegration, SpacePair,
};
use critmoments::kergin::{kergin_suite, PointConfiguration, SuiteCheck, SuiteRecord};
use critmoments::polyalg::{basis_len, PolyVectorField, Polynomial};
use critmoments::rng::{fill_standard_normal, stream};
use critmoments::zerocount::{
    bezout_check, crofton_volume, moment_experiment, CountOptions, CountTarget, CroftonOptions,
    MomentExperiment,
};
use critmoments::BoxDomain;

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

impl Outcome {
    fn ok(&self) -> bool {
        self.passed && self.elapsed <= self.limit
    }
}

fn timed(
    id: usize,
    name: &'static str,
    limit_s: u64,
    f: impl FnOnce() -> (bool, String),
) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    Outcome {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
        limit: Duration::from_secs(limit_s),
    }
}

fn worst(records: &[SuiteRecord], check: SuiteCheck) -> (usize, f64) {
    let errors: Vec<f64> = records
        .iter()
        .filter(|r| r.check == check)
        .map(|r| r.error)
        .collect();
    (errors.len(), errors.iter().copied().fold(0.0, f64::max))
}

fn kergin_cases() -> Vec<SuiteRecord> {
    kergin_suite(240, 2024, Execution::default()).expect("kergin suite")
}

fn criterion_1() -> Outcome {
    timed(1, "Kergin projector and Hermite suite", 60, || {
        let records = kergin_cases();
        let cases = records.iter().map(|r| r.case).max().map_or(0, |c| c + 1);
        let mut passed = cases >= 200;
        let mut parts = vec![format!("{cases} cases")];
        for check in [
            SuiteCheck::Reproduction,
            SuiteCheck::Lagrange,
            SuiteCheck::Hermite,
            SuiteCheck::TaylorLimit,
        ] {
            let (n, err) = worst(&records, check);
            passed &= n > 0 && err <= check.tolerance();
            parts.push(format!(
                "{check} {err:.1e} <= {:.0e} (n={n})",
                check.tolerance()
            ));
        }
        (passed, parts.join(", "))
    })
}

fn criterion_2() -> Outcome {
    timed(2, "gradient and holomorphic closure", 60, || {
        let records = kergin_cases();
        let mut passed = true;
        let mut parts = Vec::new();
        for check in [SuiteCheck::Curl, SuiteCheck::CauchyRiemann] {
            let (n, err) = worst(&records, check);
            passed &= n >= 100 && err <= 1e-8;
            parts.push(format!("{check} residual {err:.1e} <= 1e-8 (n={n})"));
        }
        (passed, parts.join(", "))
    })
}

fn mean_within(
    model: &dyn GaussianFieldModel,
    target: CountTarget,
    expected: f64,
    seed: u64,
) -> (bool, String) {
    let bbox = BoxDomain::cube(1, 0.0, 10.0).unwrap();
    let cfg = MomentExperiment {
        target,
        samples: 2000,
        p_max: 1,
        seed,
        ..Default::default()
    };
    let report = moment_experiment(model, &bbox, &cfg).expect("moment experiment");
    let m = &report.moments[0];
    let z = (m.mean - expected).abs() / m.stderr;
    (
        z <= 3.0 && !report.flagged,
        format!(
            "{:.4} ± {:.4} vs {expected:.4} ({z:.2} s.e.)",
            m.mean, m.stderr
        ),
    )
}

fn criterion_3() -> Outcome {
    timed(3, "1D Kac-Rice anchor on [0,10]", 300, || {
        let model = BargmannFock::new(1);
        let (a, da) = mean_within(&model, CountTarget::Zeros, 10.0 / PI, 31);
        let (b, db) = mean_within(
            &model,
            CountTarget::CriticalPoints,
            10.0 * 3f64.sqrt() / PI,
            32,
        );
        (a && b, format!("zeros {da}; critical points {db}"))
    })
}

fn criterion_4() -> Outcome {
    timed(4, "factorization identity rho = R sigma", 600, || {
        let mut n = 0;
        let mut worst_z = 0.0f64;
        let mut passed = true;
        for d in 1..=2usize {
            for gradient in [false, true] {
                let model: Box<dyn GaussianFieldModel> = if gradient {
                    Box::new(GradientModel::new(BargmannFock::new(d)))
                } else {
                    Box::new(ProductOfIndependents::new(d, d))
                };
                for p in 1..=3usize {
                    let spaces = if gradient {
                        SpacePair::gradient(d, p)
                    } else {
                        SpacePair::vector(d, p)
                    };
                    for rep in 0..5u64 {
                        let seed = 1000 * d as u64 + 100 * p as u64 + 10 * gradient as u64 + rep;
                        let config = separated_configuration(d, p, seed);
                        let f = kac_factorization(
                            model.as_ref(),
                            &spaces,
                            &config,
                            &KacOptions::default().with_seed(seed),
                        )
                        .expect("factorization");
                        let z = f.identity_gap() / f.combined_se;
                        worst_z = worst_z.max(z);
                        passed &= f.identity_holds(3.0);
                        n += 1;
                    }
                }
            }
        }
        (
            passed && n >= 50,
            format!("{n} configurations, max |rho - R sigma| = {worst_z:.2} s.e. <= 3"),
        )
    })
}

/// Uniform points in `[-1, 1]^d`, pairwise at least 0.2 apart.
fn separated_configuration(d: usize, p: usize, seed: u64) -> PointConfiguration {
    let mut rng = stream(seed, 0);
    let mut points: Vec<Vec<f64>> = Vec::new();
    while points.len() < p {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if points
            .iter()
            .all(|y| x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() >= 0.04)
        {
            points.push(x);
        }
    }
    PointConfiguration::new(points).unwrap()
}

fn collapse_start(d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![0.0; d];
    u[0] = 1.0;
    (vec![0.1; d], u)
}

fn criterion_5() -> Outcome {
    timed(5, "near-diagonal exponent 2 - d", 600, || {
        let eps = log_spaced(1e-3, 1.0, 12);
        let mut passed = true;
        let mut parts = Vec::new();
        for d in 1..=3usize {
            let (x, u) = collapse_start(d);
            let fit = near_diagonal_exponent(
                &ProductOfIndependents::new(d, d),
                &x,
                &u,
                &eps,
                &KacOptions::default().with_seed(1),
            )
            .expect("exponent fit");
            let expected = 2.0 - d as f64;
            passed &= fit.eps.len() == 12 && (fit.slope - expected).abs() <= 0.3;
            parts.push(format!("d={d} slope {:.3} vs {expected} ± 0.3", fit.slope));
        }
        (passed, parts.join(", "))
    })
}

fn criterion_6() -> Outcome {
    timed(6, "sigma bounded along collapse paths", 600, || {
        let eps = log_spaced(1e-3, 1.0, 12);
        let mut passed = true;
        let mut parts = Vec::new();
        for d in 1..=3usize {
            let (x, u) = collapse_start(d);
            let path = collapse_path(&x, &[vec![0.0; d], u], &eps).unwrap();
            let probe = sigma_boundedness_probe(
                &ProductOfIndependents::new(d, d),
                &SpacePair::vector(d, 2),
                &path,
                &KacOptions::default().with_seed(2),
            )
            .expect("sigma probe");
            let slope = probe.sigma_slope.expect("gaps vary");
            passed &= slope.abs() <= 0.2;
            parts.push(format!(
                "d={d} |sigma slope| {:.3} <= 0.2 (R slope {:.3})",
                slope.abs(),
                probe.r_slope.unwrap_or(f64::NAN)
            ));
        }
        (passed, parts.join(", "))
    })
}

fn random_poly(d: usize, degree: usize, seed: u64, index: u64) -> Polynomial<f64> {
    let mut c = vec![0.0; basis_len(d, degree)];
    fill_standard_normal(&mut stream(seed, index), &mut c);
    Polynomial::from_coeffs(d, degree, c).unwrap()
}

fn criterion_7() -> Outcome {
    timed(7, "Bezout bound", 300, || {
        let bbox = BoxDomain::cube(2, -1.5, 1.5).unwrap();
        let opts = CountOptions::default();
        let systems = 10_000;
        let outcomes = Execution::default().map(systems, |i| {
            let mut rng = stream(77, i as u64);
            let degrees = [rng.random_range(1..=3usize), rng.random_range(1..=3usize)];
            let comps = degrees
                .iter()
                .enumerate()
                .map(|(k, &deg)| random_poly(2, deg, 78, (2 * i + k) as u64))
                .collect();
            let check = bezout_check(&PolyVectorField::new(comps).unwrap(), &bbox, &opts)
                .expect("bezout check");
            (check.ok, check.count)
        });
        let violations = outcomes.iter().filter(|(ok, _)| !ok).count();
        let max_count = outcomes.iter().map(|(_, c)| *c).max().unwrap_or(0);

        let line = BoxDomain::cube(1, -2.0, 2.0).unwrap();
        let mut mismatches = 0;
        for i in 0..1000u64 {
            let degree = 1 + (i % 8) as usize;
            let p = PolyVectorField::new(vec![random_poly(1, degree, 79, i)]).unwrap();
            let check = bezout_check(&p, &line, &opts).expect("companion check");
            mismatches += (check.complex_count != Some(degree) || !check.ok) as usize;
        }
        (
            violations == 0 && mismatches == 0,
            format!(
                "{systems} systems in d=2: {violations} violations (max count {max_count}); \
                 1000 polynomials in d=1: {mismatches} companion mismatches"
            ),
        )
    })
}

fn criterion_8() -> Outcome {
    timed(8, "Crofton anchor", 300, || {
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let x = Polynomial::variable(2, 0);
        let y = Polynomial::variable(2, 1);
        let circle = x
            .mul_linear(0, 0.0)
            .add(&y.mul_linear(1, 0.0))
            .sub(&Polynomial::constant(2, 0, 0.25));
        let mut passed = true;
        let mut parts = Vec::new();
        for (name, poly, exact, seed) in [("segment", x, 2.0, 81), ("circle", circle, PI, 82)] {
            let f = PolyVectorField::new(vec![poly]).unwrap();
            let est = crofton_volume(
                &f,
                &bbox,
                1,
                &CroftonOptions {
                    probes: 2000,
                    seed,
                    ..Default::default()
                },
            )
            .expect("crofton");
            let rel = (est.estimate - exact).abs() / exact;
            passed &= rel <= 0.1;
            parts.push(format!(
                "{name} {:.4} ± {:.4} vs {exact:.4} (rel {rel:.3} <= 0.1)",
                est.estimate, est.stderr
            ));
        }
        (passed, parts.join(", "))
    })
}

/// Planar sample paths for criterion 9. The half-way drift of the running
/// mean has standard deviation close to `stderr / mean`, about 0.05 for
/// `X^4` at 2000 samples; 20000 samples bring it near 0.016.
const PLANAR_SAMPLES: usize = 20_000;

fn criterion_9() -> Outcome {
    timed(9, "moment stabilization", 1800, || {
        let bbox = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let report = moment_experiment(
            &BargmannFock::new(2),
            &bbox,
            &MomentExperiment {
                target: CountTarget::CriticalPoints,
                samples: PLANAR_SAMPLES,
                p_max: 4,
                seed: 91,
                ..Default::default()
            },
        )
        .expect("planar moments");
        let drift = report.moments.iter().map(|m| m.drift).fold(0.0, f64::max);
        let max_count = report.moments[0].max_count;
        let noise = report
            .moments
            .iter()
            .map(|m| m.stderr / m.mean)
            .fold(0.0, f64::max);
        let mut passed = drift < 0.05 && !report.flagged && report.moments.len() == 4;
        let means: Vec<String> = report
            .moments
            .iter()
            .map(|m| format!("{:.3}", m.mean))
            .collect();

        let line = BoxDomain::cube(1, 0.0, 2.0).unwrap();
        let counted = moment_experiment(
            &BargmannFock::new(1),
            &line,
            &MomentExperiment {
                target: CountTarget::CriticalPoints,
                samples: 2000,
                p_max: 2,
                seed: 92,
                ..Default::default()
            },
        )
        .expect("line moments");
        let integrated = factorial_moment(
            &GradientModel::new(BargmannFock::new(1)),
            &line,
            2,
            &MomentIntegration {
                seed: 93,
                ..Default::default()
            },
        )
        .expect("factorial moment");
        let empirical = &counted.factorial_moments[1];
        let combined = (empirical.stderr.powi(2) + integrated.stderr.powi(2)).sqrt();
        let z = (empirical.mean - integrated.estimate).abs() / combined;
        passed &= z <= 3.0;
        (
            passed,
            format!(
                "d=2 n={PLANAR_SAMPLES} means E[X^p] = [{}], max drift {drift:.4} < 0.05 \
                 (noise {noise:.4}), max count {max_count}, unresolved {:.3}; d=1 E[X^[2]] {:.4} ± {:.4} vs {:.4} ± {:.4} ({z:.2} s.e. <= 3)",
                means.join(", "),
                report.unresolved_fraction,
                empirical.mean,
                empirical.stderr,
                integrated.estimate,
                integrated.stderr
            ),
        )
    })
}

fn main() -> ExitCode {
    let criteria: [fn() -> Outcome; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    let mut failed = 0;
    for run in criteria {
        let o = run();
        println!(
            "{} criterion {}: {}: {} [{:.1}s, limit {}s]",
            if o.ok() { "PASS" } else { "FAIL" },
            o.id,
            o.name,
            o.detail,
            o.elapsed.as_secs_f64(),
            o.limit.as_secs()
        );
        failed += !o.ok() as usize;
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
