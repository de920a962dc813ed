//! Solver for the linear matrix equation `X = A f(X) B + C` where `f` is an
//! additive, (anti-)multiplicative matrix operator of finite period `n`.
//!
//! Composing the right-hand side `n` times yields a Stein equation
//! `𝒳 = 𝒜 𝒳 ℬ + 𝒞`. Any solution of that Stein equation, however obtained,
//! is mapped back to a solution of the original equation by averaging the
//! first `n` points of its orbit under `X ↦ A f(X) B + C`.
//!
//! Module map:
//!
//! - [`linalg`]: dense complex matrices, Kronecker/vec algebra, eigenvalues, solves.
//! - [`operators`]: period-`n` operators and randomized axiom checks.
//! - [`stein`]: the equation types, the orbit map and Stein-coefficient construction.
//! - [`recovery`]: the averaging operator in all of its equivalent forms.
//! - [`solvers`]: direct and Smith-type solvers plus the end-to-end pipeline.
//! - [`solvability`]: reciprocal-free tests and the anti-transpose spectral law.
//! - [`multiterm`]: sums of terms over a homogeneous operator family.
//! - [`random`]: seeded generators for test corpora and demos.
//!
//! ```
//! use periodic_stein::linalg::Matrix;
//! use periodic_stein::operators::PeriodicOperator;
//! use periodic_stein::solvers::{solve, SolverConfig};
//! use periodic_stein::stein::LinearMatrixEquation;
//!
//! let a = Matrix::from_real(&[&[0.3, 0.1], &[0.0, 0.2]]).unwrap();
//! let b = Matrix::from_real(&[&[0.5, 0.0], &[0.2, 0.4]]).unwrap();
//! let c = Matrix::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
//! let eq = LinearMatrixEquation::new(a, b, c, PeriodicOperator::transpose()).unwrap();
//! let report = solve(&eq, &SolverConfig::default()).unwrap();
//! assert!(report.eq_residual < 1e-12);
//! ```

pub mod error;
pub mod linalg;
pub mod multiterm;
pub mod operators;
pub mod random;
pub mod recovery;
pub mod solvability;
pub mod solvers;
pub mod stein;

pub use error::{Error, Result};
