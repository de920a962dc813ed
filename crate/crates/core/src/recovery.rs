//! Mapping Stein solutions back to solutions of `X = A f(X) B + C`.
//!
//! The averaging operator `F(𝒳) = (1/n) Σ_{i<n} 𝒪^(i)(𝒳)` sends every
//! solution of the induced Stein equation to a solution of the original
//! equation and fixes every solution of the original equation. It has several
//! algebraically equal expansions; all of them are available here so they can
//! be checked against each other:
//!
//! | method | form |
//! |---|---|
//! | [`Recovery::average`] | orbit average (canonical, both operator kinds) |
//! | [`Recovery::explicit`] | `(1/n) Σ (G_i(𝒳) + (n-i-1) G_i(C))`, or the paired products for order-reversing `f` |
//! | [`Recovery::weighted`] | `(1/n) Σ (G_i(𝒳) + Σ_{j<i} G_j(C))`, order-preserving only |
//! | [`Recovery::k_fold`] | the explicit form over `kn` compositions |
//! | [`Recovery::k1n`] | the explicit form for the equation obtained from `kn+1` compositions |
//!
//! The plain methods accept any matrix. The `recover*` methods first check
//! that the input solves the Stein equation, because only then is the output
//! guaranteed to solve the original equation.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::operators::OrderKind;
use crate::stein::{FactorTable, LinearMatrixEquation, SteinSystem};

/// Default bound on the relative Stein residual accepted by the gate.
pub const DEFAULT_STEIN_TOL: f64 = 1e-8;

/// Bound used by [`Recovery::idempotence_check`].
pub const IDEMPOTENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Recovery<'a> {
    eq: &'a LinearMatrixEquation,
    stein: SteinSystem,
    tol: f64,
}

#[derive(Debug, Clone)]
pub struct IdempotenceReport {
    pub once: Matrix,
    pub twice: Matrix,
    /// `‖F(F(𝒳)) − F(𝒳)‖_F`.
    pub error: f64,
    pub passed: bool,
}

impl<'a> Recovery<'a> {
    pub fn new(eq: &'a LinearMatrixEquation) -> Result<Self> {
        Ok(Self {
            eq,
            stein: eq.build_stein()?,
            tol: DEFAULT_STEIN_TOL,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn stein(&self) -> &SteinSystem {
        &self.stein
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Relative Stein residual of `x`, or an error if it exceeds the tolerance.
    pub fn gate(&self, x: &Matrix) -> Result<f64> {
        self.stein.a.require_same_shape(x, "recovery input")?;
        let residual = self.stein.relative_residual(x);
        if residual <= self.tol {
            Ok(residual)
        } else {
            Err(Error::NotASteinSolution {
                residual,
                tol: self.tol,
            })
        }
    }

    fn n(&self) -> usize {
        self.eq.period()
    }

    fn check(&self, x: &Matrix) -> Result<()> {
        self.stein.a.require_same_shape(x, "recovery input")
    }

    /// Orbit average `(1/n) Σ_{i<n} 𝒪^(i)(X)`.
    pub fn average(&self, x: &Matrix) -> Result<Matrix> {
        self.check(x)?;
        let n = self.n();
        let sum = sum_all(self.eq.orbit(x, n), x.rows());
        Ok(sum.scale_real(1.0 / n as f64))
    }

    /// Explicit expansion in terms of images of `A`, `B`, `C` and `X`.
    pub fn explicit(&self, x: &Matrix) -> Result<Matrix> {
        self.check(x)?;
        let n = self.n();
        let table = FactorTable::new(self.eq, n);
        let op = self.eq.op();
        let xs = op.orbit(x, n);
        let cs = op.orbit(self.eq.c(), n);
        let m = x.rows();
        let sum = match op.kind() {
            OrderKind::Preserving => {
                let mut acc = Matrix::zeros(m, m);
                for i in 0..n {
                    let (l, r) = table.outer_factors(i);
                    let inner = &xs[i] + &cs[i].scale_real((n - i - 1) as f64);
                    acc = &acc + &(&(&l * &inner) * &r);
                }
                acc
            }
            OrderKind::Reversing => {
                let mut acc = Matrix::zeros(m, m);
                for i in 0..n / 2 {
                    let (e, o) = (2 * i, 2 * i + 1);
                    let odd = &xs[o] + &cs[o].scale_real((n - e - 2) as f64);
                    let inner = &(&xs[e] + &cs[e].scale_real((n - e - 1) as f64))
                        + &(&(table.a_image(e) * &odd) * table.b_image(e));
                    acc = &acc + &(&(&table.left_pairs(i) * &inner) * &table.right_pairs(i));
                }
                if n % 2 == 1 {
                    let p = (n - 1) / 2;
                    acc = &acc + &(&(&table.left_pairs(p) * &xs[n - 1]) * &table.right_pairs(p));
                }
                acc
            }
        };
        Ok(sum.scale_real(1.0 / n as f64))
    }

    /// `(1/n) Σ_{i<n} (G_i(X) + Σ_{j<i} G_j(C))`. Order-preserving `f` only.
    pub fn weighted(&self, x: &Matrix) -> Result<Matrix> {
        self.check(x)?;
        if self.eq.op().kind() != OrderKind::Preserving {
            return Err(Error::UnsupportedOperator {
                operation: "recover_weighted",
                reason: format!("`{}` is order-reversing", self.eq.op().name()),
            });
        }
        let n = self.n();
        let m = x.rows();
        let g_c: Vec<Matrix> = (0..n).map(|j| self.eq.g_op(j, self.eq.c())).collect::<Result<_>>()?;
        let mut acc = Matrix::zeros(m, m);
        for i in 0..n {
            acc = &acc + &self.eq.g_op(i, x)?;
            for gc in &g_c[..i] {
                acc = &acc + gc;
            }
        }
        Ok(acc.scale_real(1.0 / n as f64))
    }

    /// `(1/(kn)) Σ_{i<kn} (G_i(X) + (kn-i-1) G_i(C))`.
    pub fn k_fold(&self, x: &Matrix, k: usize) -> Result<Matrix> {
        self.check(x)?;
        if k == 0 {
            return Err(Error::InvalidParameter("recover_k needs k >= 1".into()));
        }
        let total = k * self.n();
        let table = FactorTable::new(self.eq, total);
        let op = self.eq.op();
        let xs = op.orbit(x, total);
        let cs = op.orbit(self.eq.c(), total);
        let mut acc = Matrix::zeros(x.rows(), x.rows());
        for i in 0..total {
            let (l, r) = table.outer_factors(i);
            let inner = &xs[i] + &cs[i].scale_real((total - i - 1) as f64);
            acc = &acc + &(&(&l * &inner) * &r);
        }
        Ok(acc.scale_real(1.0 / total as f64))
    }

    /// Averaging operator of the equation obtained by composing `kn + 1`
    /// copies of the right-hand side,
    /// `Y = (𝒜^k A) f(Y) (B ℬ^k) + 𝒜^k C ℬ^k + Σ_{j<k} 𝒜^j 𝒞 ℬ^j`,
    /// expanded as
    /// `(1/n) Σ_{i<n} 𝒜^{ik} [H_i(Y) + (n-i-1)(𝒜^k H_i(C) ℬ^k + Σ_{j<k} 𝒜^j H_i(𝒞) ℬ^j)] ℬ^{ik}`.
    pub fn k1n(&self, y: &Matrix, k: usize) -> Result<Matrix> {
        self.check(y)?;
        if k == 0 {
            return Err(Error::InvalidParameter("recover_k1n needs k >= 1".into()));
        }
        let n = self.n();
        let m = y.rows();
        let (sa, sb) = (&self.stein.a, &self.stein.b);
        let a_pows: Vec<Matrix> = powers(sa, k * (n - 1) + k + 1);
        let b_pows: Vec<Matrix> = powers(sb, k * (n - 1) + k + 1);
        let h_y = self.eq.h_sequence(y, n);
        let h_c = self.eq.h_sequence(self.eq.c(), n);
        let h_cc = self.eq.h_sequence(&self.stein.c, n);
        let mut acc = Matrix::zeros(m, m);
        for i in 0..n {
            let mut delta = &(&a_pows[k] * &h_c[i]) * &b_pows[k];
            for j in 0..k {
                delta = &delta + &(&(&a_pows[j] * &h_cc[i]) * &b_pows[j]);
            }
            let inner = &h_y[i] + &delta.scale_real((n - i - 1) as f64);
            acc = &acc + &(&(&a_pows[i * k] * &inner) * &b_pows[i * k]);
        }
        Ok(acc.scale_real(1.0 / n as f64))
    }

    pub fn recover(&self, x: &Matrix) -> Result<Matrix> {
        self.gate(x)?;
        self.average(x)
    }

    pub fn recover_explicit(&self, x: &Matrix) -> Result<Matrix> {
        self.gate(x)?;
        self.explicit(x)
    }

    pub fn recover_weighted(&self, x: &Matrix) -> Result<Matrix> {
        self.gate(x)?;
        self.weighted(x)
    }

    pub fn recover_k(&self, x: &Matrix, k: usize) -> Result<Matrix> {
        self.gate(x)?;
        self.k_fold(x, k)
    }

    pub fn recover_k1n(&self, y: &Matrix, k: usize) -> Result<Matrix> {
        self.gate(y)?;
        self.k1n(y, k)
    }

    /// Applies the averaging operator twice to a Stein solution and measures
    /// how far the second application moves the result.
    pub fn idempotence_check(&self, x: &Matrix) -> Result<IdempotenceReport> {
        let once = self.recover(x)?;
        let twice = self.average(&once)?;
        let error = (&twice - &once).frob_norm();
        Ok(IdempotenceReport {
            once,
            twice,
            error,
            passed: error <= IDEMPOTENCE_TOL,
        })
    }
}

/// Gated orbit-average recovery with the default tolerance.
pub fn recover(eq: &LinearMatrixEquation, x_stein: &Matrix) -> Result<Matrix> {
    Recovery::new(eq)?.recover(x_stein)
}

fn sum_all(terms: Vec<Matrix>, m: usize) -> Matrix {
    terms.iter().fold(Matrix::zeros(m, m), |acc, t| &acc + t)
}

fn powers(a: &Matrix, count: usize) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(count);
    let mut cur = Matrix::identity(a.rows());
    for _ in 0..count {
        let next = &cur * a;
        out.push(cur);
        cur = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::operators::PeriodicOperator;
    use crate::random;

    fn scalar(x: f64) -> Matrix {
        Matrix::scalar(C64::new(x, 0.0))
    }

    fn counterexample(c: f64) -> LinearMatrixEquation {
        LinearMatrixEquation::new(scalar(-1.0), scalar(1.0), scalar(c), PeriodicOperator::identity(2)).unwrap()
    }

    #[test]
    fn counterexample_recovers_half_c_from_any_point() {
        let eq = counterexample(2.0);
        let rec = Recovery::new(&eq).unwrap();
        for x in [0.0, 7.0, -3.0, 1e6] {
            let x = scalar(x);
            assert_eq!(rec.recover(&x).unwrap(), scalar(1.0));
            assert_eq!(rec.recover_explicit(&x).unwrap(), scalar(1.0));
            assert_eq!(rec.recover_weighted(&x).unwrap(), scalar(1.0));
            for k in [1, 2, 5] {
                assert_eq!(rec.recover_k(&x, k).unwrap(), scalar(1.0));
            }
            assert_eq!(rec.recover_k1n(&x, 1).unwrap(), scalar(1.0));
        }
    }

    #[test]
    fn counterexample_idempotence() {
        let eq = counterexample(2.0);
        let report = Recovery::new(&eq).unwrap().idempotence_check(&scalar(7.0)).unwrap();
        assert_eq!(report.once, scalar(1.0));
        assert_eq!(report.twice, scalar(1.0));
        assert!(report.passed);
    }

    #[test]
    fn period_two_average_is_half_sum() {
        let mut rng = random::rng(11);
        let m = 3;
        let eq = LinearMatrixEquation::new(
            random::complex_matrix(&mut rng, m, m),
            random::complex_matrix(&mut rng, m, m),
            random::complex_matrix(&mut rng, m, m),
            PeriodicOperator::hermitian(),
        )
        .unwrap();
        let x = random::complex_matrix(&mut rng, m, m);
        let rec = Recovery::new(&eq).unwrap();
        let expected = (&(&x + &(&(eq.a() * &x.adjoint()) * eq.b())) + eq.c()).scale_real(0.5);
        assert!((&rec.average(&x).unwrap() - &expected).frob_norm() < 1e-14);
    }

    #[test]
    fn gate_rejects_non_solutions() {
        let mut rng = random::rng(12);
        let eq = random::equation_with_rho(&mut rng, 3, &PeriodicOperator::transpose(), 0.5).unwrap();
        let rec = Recovery::new(&eq).unwrap();
        let junk = random::complex_matrix(&mut rng, 3, 3);
        assert!(matches!(rec.recover(&junk), Err(Error::NotASteinSolution { .. })));
        // the ungated operator still evaluates
        assert!(rec.average(&junk).is_ok());
        assert!(rec.recover(&Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn homogeneous_explicit_form() {
        let mut rng = random::rng(13);
        let eq = random::equation_with_rho(&mut rng, 3, &PeriodicOperator::conjugate(), 0.5)
            .unwrap()
            .with_constant(Matrix::zeros(3, 3))
            .unwrap();
        let rec = Recovery::new(&eq).unwrap();
        let x = random::complex_matrix(&mut rng, 3, 3);
        let n = eq.period();
        let mut expected = Matrix::zeros(3, 3);
        for i in 0..n {
            expected = &expected + &eq.g_op(i, &x).unwrap();
        }
        let expected = expected.scale_real(1.0 / n as f64);
        assert!((&rec.explicit(&x).unwrap() - &expected).frob_norm() < 1e-14);
    }

    #[test]
    fn weighted_rejects_reversing_and_is_identity_for_period_one() {
        let mut rng = random::rng(14);
        let eq = random::equation_with_rho(&mut rng, 2, &PeriodicOperator::transpose(), 0.5).unwrap();
        let x = random::complex_matrix(&mut rng, 2, 2);
        assert!(Recovery::new(&eq).unwrap().weighted(&x).is_err());

        let id = random::equation_with_rho(&mut rng, 2, &PeriodicOperator::identity(1), 0.5).unwrap();
        assert_eq!(Recovery::new(&id).unwrap().weighted(&x).unwrap(), x);
    }
}
