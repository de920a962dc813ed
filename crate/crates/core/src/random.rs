//! Seeded generators shared by the randomized checks, the demos and the tests.
//!
//! Every generator draws from a ChaCha stream keyed by `(seed, stream)`, so
//! independent consumers of one seed never share random numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, C64};
use crate::operators::PeriodicOperator;
use crate::stein::LinearMatrixEquation;

pub type SeededRng = ChaCha8Rng;

/// Generator for `seed` on the default stream.
pub fn rng(seed: u64) -> SeededRng {
    stream(seed, 0)
}

/// Generator for `seed` on an independent sub-stream.
pub fn stream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Complex entries with real and imaginary parts uniform on `[-1, 1)`.
pub fn complex_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Matrix::new(rows, cols, data).expect("finite by construction")
}

/// Real entries uniform on `[-1, 1)`.
pub fn real_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), 0.0))
        .collect();
    Matrix::new(rows, cols, data).expect("finite by construction")
}

/// `S D S⁻¹` for a random complex `S`, so the spectrum is exactly `d` up to rounding.
pub fn with_spectrum(rng: &mut impl Rng, d: &[C64]) -> Result<Matrix> {
    let m = d.len();
    loop {
        let s = complex_matrix(rng, m, m);
        match linalg::solve_dense(&s, &Matrix::identity(m)) {
            Ok(inv) => return Ok(&(&s * &Matrix::diag(d)) * &inv),
            Err(Error::Singular { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Complex number with modulus uniform on `[lo, hi)` and uniform argument.
pub fn in_annulus(rng: &mut impl Rng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(rng.random_range(lo..hi), rng.random_range(0.0..std::f64::consts::TAU))
}

/// Random equation `X = A f(X) B + C` whose Stein coefficients satisfy
/// `ρ(𝒜)ρ(ℬ) = target_rho`.
///
/// `A` and `B` are drawn at random and both scaled by the same positive
/// real factor; `𝒜` and `ℬ` together contain `n` copies of each, so the
/// product of their spectral radii scales by that factor to the power `2n`.
pub fn equation_with_rho(
    rng: &mut impl Rng,
    m: usize,
    op: &PeriodicOperator,
    target_rho: f64,
) -> Result<LinearMatrixEquation> {
    let m = op.dimension().unwrap_or(m);
    loop {
        let a = complex_matrix(rng, m, m);
        let b = complex_matrix(rng, m, m);
        let c = complex_matrix(rng, m, m);
        let probe = LinearMatrixEquation::new(a.clone(), b.clone(), c.clone(), op.clone())?;
        let rho = probe.build_stein()?.rho()?;
        if rho < 1e-8 {
            continue;
        }
        let factor = (target_rho / rho).powf(1.0 / (2 * op.period()) as f64);
        return LinearMatrixEquation::new(a.scale_real(factor), b.scale_real(factor), c, op.clone());
    }
}
