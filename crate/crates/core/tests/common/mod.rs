//! Corpora shared by the integration tests.
#![allow(dead_code)]

use periodic_stein::linalg::{self, Matrix, C64};
use periodic_stein::operators::{Permutation, PeriodicOperator};
use periodic_stein::random::{self, SeededRng};
use periodic_stein::stein::{LinearMatrixEquation, SteinSystem};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn scalar(x: f64) -> Matrix {
    Matrix::scalar(c(x, 0.0))
}

pub fn dist(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).frob_norm()
}

/// The builtin operators with the size each one is exercised at.
pub fn builtin_ops() -> Vec<(PeriodicOperator, usize)> {
    vec![
        (PeriodicOperator::transpose(), 3),
        (PeriodicOperator::hermitian(), 3),
        (PeriodicOperator::conjugate(), 3),
        (PeriodicOperator::anti_transpose(), 3),
        (PeriodicOperator::perm_similarity(&Permutation::primary(3)), 3),
        (PeriodicOperator::identity(1), 3),
    ]
}

/// Order reversing, period 4: `X ↦ Pᵀ Xᵀ P` with the primary `P` of size 4.
pub fn transpose_perm4() -> PeriodicOperator {
    let p = PeriodicOperator::perm_similarity(&Permutation::primary(4));
    PeriodicOperator::composed("transpose∘perm4", &PeriodicOperator::transpose(), &p, 4).unwrap()
}

/// `count` seeded equations with `ρ(𝒜)ρ(ℬ)` spread over `[0.1, max_rho]`.
pub fn corpus(op: &PeriodicOperator, m: usize, count: usize, max_rho: f64, seed: u64) -> Vec<LinearMatrixEquation> {
    let mut rng = random::rng(seed);
    (0..count)
        .map(|i| {
            let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 1.0 };
            let rho = 0.1 + t * (max_rho - 0.1);
            random::equation_with_rho(&mut rng, m, op, rho).unwrap()
        })
        .collect()
}

pub fn inverse(m: &Matrix) -> Matrix {
    linalg::solve_dense(m, &Matrix::identity(m.rows())).unwrap()
}

pub fn with_spectrum(rng: &mut SeededRng, d: &[C64]) -> Matrix {
    random::with_spectrum(rng, d).unwrap()
}

pub fn random_in_annulus(rng: &mut SeededRng, lo: f64, hi: f64) -> C64 {
    random::in_annulus(rng, lo, hi)
}

/// Kernel vector of a nearly singular square matrix by shifted inverse iteration.
pub fn null_vector(m: &Matrix, seed: u64) -> Matrix {
    let n = m.rows();
    let shifted = m + &Matrix::identity(n).scale_real(1e-10);
    let mut v = random::complex_matrix(&mut random::rng(seed), n, 1);
    for _ in 0..3 {
        v = linalg::solve_dense(&shifted, &v).unwrap();
        v = v.scale_real(1.0 / v.frob_norm());
    }
    v
}

/// Transpose equation whose Stein system is singular but consistent while
/// the equation itself is uniquely solvable: `A Bᵀ` has a simple eigenvalue
/// −1, so `σ(𝒜) = σ(ℬ)` contains the reciprocal pair (−1, −1).
///
/// Returns the equation and a rank-one Stein null direction `u vᵀ`.
pub fn singular_stein_case(seed: u64, m: usize) -> (LinearMatrixEquation, Matrix) {
    let mut rng = random::rng(seed);
    let mut d = vec![c(-1.0, 0.0)];
    d.extend((1..m).map(|_| random_in_annulus(&mut rng, 0.2, 0.7)));
    let target = with_spectrum(&mut rng, &d);
    let b = random::complex_matrix(&mut rng, m, m);
    let a = &target * &inverse(&b.transpose());
    let cc = random::complex_matrix(&mut rng, m, m);
    let eq = LinearMatrixEquation::new(a, b, cc, PeriodicOperator::transpose()).unwrap();
    let s = eq.build_stein().unwrap();
    let id = Matrix::identity(m);
    let u = null_vector(&(&s.a + &id), seed ^ 1);
    let v = null_vector(&(&s.b.transpose() + &id), seed ^ 2);
    (eq, &u * &v.transpose())
}

/// The four kinds of anti-transpose cases by `kind % 4`: generic, reciprocal
/// pair, simple −1, double −1. Returns `(A, B, expected_unique)`.
pub fn anti_transpose_case(seed: u64, m: usize, kind: usize) -> (Matrix, Matrix, bool) {
    let mut rng = random::stream(seed, 0x6578);
    let mut d: Vec<C64> = (0..m).map(|_| random_in_annulus(&mut rng, 0.2, 0.9)).collect();
    let unique = match kind % 4 {
        0 => true,
        1 => {
            d[0] = c(1.6, 0.7);
            d[1] = C64::new(1.0, 0.0) / d[0];
            false
        }
        2 => {
            d[0] = c(-1.0, 0.0);
            true
        }
        _ => {
            d[0] = c(-1.0, 0.0);
            d[1] = c(-1.0, 0.0);
            false
        }
    };
    let target = with_spectrum(&mut rng, &d);
    let b = random::complex_matrix(&mut rng, m, m);
    let fb = PeriodicOperator::anti_transpose().apply(&b).unwrap();
    (&target * &inverse(&fb), b, unique)
}

/// `ln` errors regressed on their index; returns the slope.
pub fn log_slope(errors: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .map(|(k, e)| (k as f64, e.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Errors `‖X − X_k‖` of an iterate sequence, cut off once they reach `floor`.
pub fn errors_above(iterates: impl Iterator<Item = Matrix>, x: &Matrix, floor: f64, cap: usize) -> Vec<f64> {
    iterates
        .take(cap)
        .map(|xk| dist(&xk, x))
        .take_while(|&e| e > floor)
        .collect()
}

pub fn stein_of(eq: &LinearMatrixEquation) -> SteinSystem {
    eq.build_stein().unwrap()
}
