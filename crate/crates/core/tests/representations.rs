mod common;

use common::*;
use periodic_stein::linalg::Matrix;
use periodic_stein::operators::PeriodicOperator;
use periodic_stein::random;
use periodic_stein::recovery::Recovery;
use periodic_stein::solvers::{self, Method, SolverConfig};
use periodic_stein::stein::LinearMatrixEquation;
use periodic_stein::Error;

/// `Y = 𝒪^(kn+1)(Y)` written as a single equation with the same operator.
fn substituted(eq: &LinearMatrixEquation, k: usize) -> LinearMatrixEquation {
    let s = stein_of(eq);
    let (ak, bk) = (s.a.pow(k).unwrap(), s.b.pow(k).unwrap());
    let mut tail = Matrix::zeros(eq.dim(), eq.dim());
    for j in 0..k {
        tail = &tail + &(&(&s.a.pow(j).unwrap() * &s.c) * &s.b.pow(j).unwrap());
    }
    let c = &(&(&ak * eq.c()) * &bk) + &tail;
    LinearMatrixEquation::new(&ak * eq.a(), eq.b() * &bk, c, eq.op().clone()).unwrap()
}

#[test]
fn substituted_equation_is_a_composition() {
    let mut rng = random::rng(41);
    for (op, m) in builtin_ops() {
        let eq = random::equation_with_rho(&mut rng, m, &op, 0.8).unwrap();
        let x = random::complex_matrix(&mut rng, m, m);
        for k in 1..=2 {
            let lhs = substituted(&eq, k).apply_o(&x).unwrap();
            let rhs = eq.compose_o(k * eq.period() + 1, &x).unwrap();
            assert!(dist(&lhs, &rhs) < 1e-12 * (1.0 + rhs.frob_norm()), "{} k={k}", op.name());
        }
    }
}

#[test]
fn k1n_is_the_average_of_the_substituted_equation() {
    // holds for every Y, not only for Stein solutions
    let mut rng = random::rng(42);
    let mut ops = builtin_ops();
    ops.push((transpose_perm4(), 4));
    for (op, m) in ops {
        let eq = random::equation_with_rho(&mut rng, m, &op, 0.8).unwrap();
        let rec = Recovery::new(&eq).unwrap();
        let y = random::complex_matrix(&mut rng, m, m);
        for k in 1..=3 {
            let eq_k = substituted(&eq, k);
            let expected = Recovery::new(&eq_k).unwrap().average(&y).unwrap();
            let got = rec.k1n(&y, k).unwrap();
            assert!(dist(&got, &expected) < 1e-11 * (1.0 + expected.frob_norm()), "{} k={k}", op.name());
        }
    }
}

#[test]
fn k_fold_differs_from_average_off_the_solution_set() {
    // F_{f,k} and F_f only agree on Stein solutions
    let mut rng = random::rng(43);
    let eq = random::equation_with_rho(&mut rng, 3, &PeriodicOperator::transpose(), 0.8).unwrap();
    let rec = Recovery::new(&eq).unwrap();
    let junk = random::complex_matrix(&mut rng, 3, 3);
    assert!(dist(&rec.average(&junk).unwrap(), &rec.k_fold(&junk, 2).unwrap()) > 1e-6);
    assert!(matches!(rec.recover_k(&junk, 2), Err(Error::NotASteinSolution { .. })));
}

#[test]
fn singular_stein_system_still_recovers_the_unique_solution() {
    for seed in 0..4 {
        let (eq, null) = singular_stein_case(50 + seed, 3);
        let report = solvers::solve(&eq, &SolverConfig::default()).unwrap();
        assert!(!report.reciprocal_free);
        assert_eq!(report.warnings.len(), 1, "{:?}", report.warnings);
        assert!(report.eq_residual < 1e-10 * (1.0 + report.solution.frob_norm()));

        let rec = Recovery::new(&eq).unwrap();
        let s = rec.stein();
        // the null direction really solves the homogeneous Stein equation
        let hom = &null - &(&(&s.a * &null) * &s.b);
        assert!(hom.frob_norm() < 1e-8, "seed {seed}: {}", hom.frob_norm());
        for t in [-2.0, 0.5, 3.0] {
            let other = &report.stein_solution + &null.scale(c(t, t));
            let x = rec.recover(&other).unwrap();
            assert!(dist(&x, &report.solution) < 1e-9, "seed {seed}, t {t}");
        }
    }
}

#[test]
fn iteration_count_examples() {
    let mut rng = random::rng(44);
    let op = PeriodicOperator::transpose();
    let eq = random::equation_with_rho(&mut rng, 3, &op, 0.7).unwrap();
    let s = stein_of(&eq);
    let run = |method| solvers::solve_stein(&s, &SolverConfig::with_method(method), &mut Vec::new()).unwrap();
    let smith = run(Method::Smith).iterations as f64;
    let smith2 = run(Method::SmithL).iterations as f64;
    let ratio = smith / smith2;
    assert!((1.7..=2.3).contains(&ratio), "smith {smith}, smith(2) {smith2}");

    let eq = random::equation_with_rho(&mut rng, 3, &op, 0.8).unwrap();
    let s = stein_of(&eq);
    let r = solvers::solve_stein(&s, &SolverConfig::with_method(Method::RSmith), &mut Vec::new()).unwrap();
    let bound = ((1e-12f64).ln() / 0.8f64.ln()).log2().ceil() as usize + 1;
    assert!(r.iterations <= bound, "{} > {bound}", r.iterations);
}

#[test]
fn cli_style_divergence() {
    let eq = LinearMatrixEquation::new(scalar(1.5), scalar(1.0), scalar(1.0), PeriodicOperator::identity(1)).unwrap();
    let err = solvers::solve(&eq, &SolverConfig::with_method(Method::Smith)).unwrap_err();
    assert!(matches!(err, Error::Divergence { .. }));
    // the direct route has no such restriction
    let r = solvers::solve(&eq, &SolverConfig::default()).unwrap();
    assert!((r.solution[(0, 0)] - c(-2.0, 0.0)).norm() < 1e-14);
}
