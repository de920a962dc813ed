//! Dense complex linear algebra underpinning every other module.

mod eigen;
mod matrix;
mod solve;

pub use eigen::{eigenvalues, spectral_radius, Spectrum};
pub use matrix::{frob_norm, kron, unvec, vec, Matrix, C64};
pub use solve::{lstsq, rcond, solve_dense, LeastSquares, Lu, SINGULAR_RCOND};

pub(crate) use matrix::ONE;
