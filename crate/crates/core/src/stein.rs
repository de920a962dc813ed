//! The equation `X = A f(X) B + C`, its orbit map, and the induced Stein
//! equation `𝒳 = 𝒜 𝒳 ℬ + 𝒞`.
//!
//! Two independent routes produce the homogeneous part of the `i`-fold
//! composition:
//!
//! - [`LinearMatrixEquation::h_op`] composes `X ↦ A f(X) B` literally and is
//!   the ground truth;
//! - [`LinearMatrixEquation::product_form`] writes the same thing as an
//!   explicit product `L_i f^(i)(X) R_i` of images of `A` and `B`.
//!
//! The Stein coefficients are assembled from the explicit products and are
//! checked against the literal composition in the tests.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::operators::{OrderKind, PeriodicOperator};

/// `X = A f(X) B + C` with square `A`, `B`, `C` of one size.
#[derive(Debug, Clone)]
pub struct LinearMatrixEquation {
    a: Matrix,
    b: Matrix,
    c: Matrix,
    op: PeriodicOperator,
}

/// Stein equation `𝒳 = 𝒜 𝒳 ℬ + 𝒞`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinSystem {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
}

impl SteinSystem {
    pub fn new(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        let m = a.require_square("Stein coefficient 𝒜")?;
        b.require_square("Stein coefficient ℬ")?;
        c.require_square("Stein constant 𝒞")?;
        if b.rows() != m || c.rows() != m {
            return Err(Error::DimensionMismatch {
                context: "SteinSystem::new",
                expected: format!("{m}x{m} throughout"),
                found: format!("ℬ {}x{}, 𝒞 {}x{}", b.rows(), b.cols(), c.rows(), c.cols()),
            });
        }
        Ok(Self { a, b, c })
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// `𝒜 X ℬ + 𝒞`.
    pub fn apply(&self, x: &Matrix) -> Matrix {
        &(&(&self.a * x) * &self.b) + &self.c
    }

    /// `‖X − 𝒜 X ℬ − 𝒞‖_F`.
    pub fn residual(&self, x: &Matrix) -> f64 {
        (x - &self.apply(x)).frob_norm()
    }

    /// Residual scaled by `‖X‖ + ‖𝒜‖‖X‖‖ℬ‖ + ‖𝒞‖` (Frobenius norms).
    pub fn relative_residual(&self, x: &Matrix) -> f64 {
        let res = self.residual(x);
        let xn = x.frob_norm();
        let scale = xn + self.a.frob_norm() * xn * self.b.frob_norm() + self.c.frob_norm();
        if scale == 0.0 {
            res
        } else {
            res / scale
        }
    }

    /// `ρ(𝒜) ρ(ℬ)`.
    pub fn rho(&self) -> Result<f64> {
        Ok(linalg::spectral_radius(&self.a)? * linalg::spectral_radius(&self.b)?)
    }

    /// `ℬᵀ ⊗ 𝒜`, so that `vec(𝒜 X ℬ) = (ℬᵀ ⊗ 𝒜) vec(X)`.
    pub fn kron_operator(&self) -> Matrix {
        self.b.transpose().kron(&self.a)
    }
}

impl LinearMatrixEquation {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, op: PeriodicOperator) -> Result<Self> {
        let m = a.require_square("coefficient A")?;
        for (name, mat) in [("B", &b), ("C", &c)] {
            if mat.shape() != (m, m) {
                return Err(Error::DimensionMismatch {
                    context: "LinearMatrixEquation::new",
                    expected: format!("{name} of size {m}x{m}"),
                    found: format!("{}x{}", mat.rows(), mat.cols()),
                });
            }
        }
        if let Some(d) = op.dimension() {
            if d != m {
                return Err(Error::DimensionMismatch {
                    context: "LinearMatrixEquation::new",
                    expected: format!("{m}x{m} operator"),
                    found: format!("operator `{}` fixed at {d}x{d}", op.name()),
                });
            }
        }
        Ok(Self { a, b, c, op })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn op(&self) -> &PeriodicOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn period(&self) -> usize {
        self.op.period()
    }

    /// Same coefficients and operator with a new constant term.
    pub fn with_constant(&self, c: Matrix) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), c, self.op.clone())
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        self.a.require_same_shape(x, "equation input")
    }

    fn sandwich(&self, x: &Matrix) -> Matrix {
        &(&self.a * &self.op.apply_unchecked(x)) * &self.b
    }

    /// `𝒪(X) = A f(X) B + C`.
    pub fn apply_o(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        Ok(&self.sandwich(x) + &self.c)
    }

    /// `𝒪^(i)(X)`; `i = 0` returns `X`.
    pub fn compose_o(&self, i: usize, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let mut out = x.clone();
        for _ in 0..i {
            out = &self.sandwich(&out) + &self.c;
        }
        Ok(out)
    }

    /// `[𝒪^(0)(X), ..., 𝒪^(count-1)(X)]`.
    pub(crate) fn orbit(&self, x: &Matrix, count: usize) -> Vec<Matrix> {
        let mut out = Vec::with_capacity(count);
        let mut cur = x.clone();
        for _ in 0..count {
            let next = &self.sandwich(&cur) + &self.c;
            out.push(cur);
            cur = next;
        }
        out
    }

    /// Homogeneous part `H_i` of `𝒪^(i)`: `H_0(X) = X`, `H_{i+1}(X) = A f(H_i(X)) B`.
    pub fn h_op(&self, i: usize, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        Ok(self.h_unchecked(i, x))
    }

    pub(crate) fn h_unchecked(&self, i: usize, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for _ in 0..i {
            out = self.sandwich(&out);
        }
        out
    }

    /// `[H_0(X), ..., H_{count-1}(X)]`.
    pub(crate) fn h_sequence(&self, x: &Matrix, count: usize) -> Vec<Matrix> {
        let mut out = Vec::with_capacity(count);
        let mut cur = x.clone();
        for _ in 0..count {
            let next = self.sandwich(&cur);
            out.push(cur);
            cur = next;
        }
        out
    }

    /// Explicit product `G_i(X) = ∏_{j=1..i} f^(j-1)(A) · f^(i)(X) · ∏_{j=1..i} f^(i-j)(B)`
    /// for order-preserving `f`.
    pub fn g_op(&self, i: usize, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        if self.op.kind() != OrderKind::Preserving {
            return Err(Error::UnsupportedOperator {
                operation: "g_op",
                reason: format!("`{}` is order-reversing; use h_op or product_form", self.op.name()),
            });
        }
        Ok(self.product_unchecked(i, x))
    }

    /// `L_i f^(i)(X) R_i` for either kind of operator: [`Self::g_op`] when
    /// `f` preserves order, the alternating `A`/`B` products otherwise.
    pub fn product_form(&self, i: usize, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        Ok(self.product_unchecked(i, x))
    }

    fn product_unchecked(&self, i: usize, x: &Matrix) -> Matrix {
        let table = FactorTable::new(self, i.max(1));
        let (left, right) = table.outer_factors(i);
        &(&left * &self.op.power_unchecked(i, x)) * &right
    }

    /// Stein coefficients obtained by composing the right-hand side `n`
    /// times, assembled from the explicit product formulas.
    pub fn build_stein(&self) -> Result<SteinSystem> {
        let n = self.period();
        let table = FactorTable::new(self, n);
        let (a, b) = table.outer_factors(n);
        let c = match self.op.kind() {
            OrderKind::Preserving => {
                let c_orbit = self.op.orbit(&self.c, n);
                let mut acc = Matrix::zeros(self.dim(), self.dim());
                for (i, ci) in c_orbit.iter().enumerate() {
                    let (l, r) = table.outer_factors(i);
                    acc = &acc + &(&(&l * ci) * &r);
                }
                acc
            }
            OrderKind::Reversing => table.reversing_constant(&self.op.orbit(&self.c, n)),
        };
        SteinSystem::new(a, b, c)
    }

    /// Stein system for `kn` compositions: `(𝒜^k, ℬ^k, Σ_{j<kn} H_j(C))`.
    pub fn build_stein_kn(&self, k: usize) -> Result<SteinSystem> {
        if k == 0 {
            return Err(Error::InvalidParameter("build_stein_kn needs k >= 1".into()));
        }
        let base = self.build_stein()?;
        if k == 1 {
            return Ok(base);
        }
        let count = k * self.period();
        let c = self
            .h_sequence(&self.c, count)
            .iter()
            .fold(Matrix::zeros(self.dim(), self.dim()), |acc, h| &acc + h);
        SteinSystem::new(base.a.pow(k)?, base.b.pow(k)?, c)
    }

    /// `‖X − A f(X) B − C‖_F`.
    pub fn residual(&self, x: &Matrix) -> Result<f64> {
        Ok((x - &self.apply_o(x)?).frob_norm())
    }
}

/// Images `f^(k)(A)`, `f^(k)(B)` for `k < count`, and the products built from them.
pub(crate) struct FactorTable {
    kind: OrderKind,
    a: Vec<Matrix>,
    b: Vec<Matrix>,
    dim: usize,
}

impl FactorTable {
    pub(crate) fn new(eq: &LinearMatrixEquation, count: usize) -> Self {
        Self {
            kind: eq.op.kind(),
            a: eq.op.orbit(&eq.a, count),
            b: eq.op.orbit(&eq.b, count),
            dim: eq.dim(),
        }
    }

    fn identity(&self) -> Matrix {
        Matrix::identity(self.dim)
    }

    /// `∏_{j=1..p} f^(2j-2)(A) f^(2j-1)(B)`.
    pub(crate) fn left_pairs(&self, p: usize) -> Matrix {
        (1..=p).fold(self.identity(), |acc, j| &(&acc * &self.a[2 * j - 2]) * &self.b[2 * j - 1])
    }

    /// Mirror image of [`Self::left_pairs`]: `f^(2p-1)(A) f^(2p-2)(B) ... f^(1)(A) f^(0)(B)`.
    pub(crate) fn right_pairs(&self, p: usize) -> Matrix {
        (1..=p)
            .rev()
            .fold(self.identity(), |acc, j| &(&acc * &self.a[2 * j - 1]) * &self.b[2 * j - 2])
    }

    pub(crate) fn a_image(&self, k: usize) -> &Matrix {
        &self.a[k]
    }

    pub(crate) fn b_image(&self, k: usize) -> &Matrix {
        &self.b[k]
    }

    /// `(L_i, R_i)` with `H_i(X) = L_i f^(i)(X) R_i`. Needs `count >= i`.
    pub(crate) fn outer_factors(&self, i: usize) -> (Matrix, Matrix) {
        match self.kind {
            OrderKind::Preserving => {
                let left = self.a[..i].iter().fold(self.identity(), |acc, m| &acc * m);
                let right = self.b[..i].iter().rev().fold(self.identity(), |acc, m| &acc * m);
                (left, right)
            }
            OrderKind::Reversing => {
                let p = i / 2;
                let (left, right) = (self.left_pairs(p), self.right_pairs(p));
                if i.is_multiple_of(2) {
                    (left, right)
                } else {
                    (&left * &self.a[2 * p], &self.b[2 * p] * &right)
                }
            }
        }
    }

    /// `𝒞` for order-reversing `f`, grouped in consecutive pairs
    /// `H_{2i-2}(C) + H_{2i-1}(C)` plus a trailing `H_{n-1}(C)` for odd `n`.
    fn reversing_constant(&self, c_orbit: &[Matrix]) -> Matrix {
        let n = c_orbit.len();
        let mut acc = Matrix::zeros(self.dim, self.dim);
        for i in 1..=n / 2 {
            let inner = &c_orbit[2 * i - 2] + &(&(&self.a[2 * i - 2] * &c_orbit[2 * i - 1]) * &self.b[2 * i - 2]);
            acc = &acc + &(&(&self.left_pairs(i - 1) * &inner) * &self.right_pairs(i - 1));
        }
        if n % 2 == 1 {
            let p = (n - 1) / 2;
            acc = &acc + &(&(&self.left_pairs(p) * &c_orbit[n - 1]) * &self.right_pairs(p));
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::operators::Permutation;
    use crate::random;

    fn scalar(x: f64) -> Matrix {
        Matrix::scalar(C64::new(x, 0.0))
    }

    fn counterexample(c: f64) -> LinearMatrixEquation {
        LinearMatrixEquation::new(scalar(-1.0), scalar(1.0), scalar(c), PeriodicOperator::identity(2)).unwrap()
    }

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).frob_norm() <= tol * (1.0 + a.frob_norm())
    }

    fn random_eq(seed: u64, m: usize, op: PeriodicOperator) -> LinearMatrixEquation {
        let mut rng = random::rng(seed);
        let a = random::complex_matrix(&mut rng, m, m);
        let b = random::complex_matrix(&mut rng, m, m);
        let c = random::complex_matrix(&mut rng, m, m);
        LinearMatrixEquation::new(a, b, c, op).unwrap()
    }

    #[test]
    fn apply_o_examples() {
        let eq = counterexample(2.0);
        assert_eq!(eq.apply_o(&scalar(5.0)).unwrap(), scalar(-3.0));

        let zero_c = random_eq(1, 3, PeriodicOperator::conjugate()).with_constant(Matrix::zeros(3, 3)).unwrap();
        assert_eq!(zero_c.apply_o(&Matrix::zeros(3, 3)).unwrap(), Matrix::zeros(3, 3));

        let mut rng = random::rng(5);
        let c = random::complex_matrix(&mut rng, 2, 2);
        let x = random::complex_matrix(&mut rng, 2, 2);
        let eq = LinearMatrixEquation::new(Matrix::identity(2), Matrix::identity(2), c.clone(), PeriodicOperator::transpose())
            .unwrap();
        assert_eq!(eq.apply_o(&x).unwrap(), &x.transpose() + &c);
    }

    #[test]
    fn compose_o_examples() {
        let eq = counterexample(2.0);
        let x = scalar(7.0);
        assert_eq!(eq.compose_o(0, &x).unwrap(), x);
        assert_eq!(eq.compose_o(2, &x).unwrap(), x);

        let eq = random_eq(2, 3, PeriodicOperator::hermitian());
        let mut rng = random::rng(20);
        let x = random::complex_matrix(&mut rng, 3, 3);
        let n = eq.period();
        let lhs = eq.compose_o(n, &x).unwrap();
        let mut rhs = eq.h_op(n, &x).unwrap();
        for j in 0..n {
            rhs = &rhs + &eq.h_op(j, eq.c()).unwrap();
        }
        assert!(close(&lhs, &rhs, 1e-13));
    }

    #[test]
    fn h_op_first_terms() {
        let eq = random_eq(3, 3, PeriodicOperator::transpose());
        let mut rng = random::rng(30);
        let x = random::complex_matrix(&mut rng, 3, 3);
        assert_eq!(eq.h_op(0, &x).unwrap(), x);
        assert_eq!(eq.h_op(1, &x).unwrap(), &(eq.a() * &x.transpose()) * eq.b());
    }

    #[test]
    fn g_op_conjugate_second_power() {
        let eq = random_eq(4, 3, PeriodicOperator::conjugate());
        let mut rng = random::rng(40);
        let x = random::complex_matrix(&mut rng, 3, 3);
        assert_eq!(eq.g_op(0, &x).unwrap(), x);
        let expected = &(&(&(eq.a() * &eq.a().conj()) * &x) * &eq.b().conj()) * eq.b();
        assert!(close(&eq.g_op(2, &x).unwrap(), &expected, 1e-14));
        let t = random_eq(4, 3, PeriodicOperator::transpose());
        assert!(matches!(t.g_op(1, &x), Err(Error::UnsupportedOperator { .. })));
    }

    #[test]
    fn g_op_semigroup() {
        let op = PeriodicOperator::perm_similarity(&Permutation::primary(3));
        let eq = random_eq(5, 3, op);
        let mut rng = random::rng(50);
        let x = random::complex_matrix(&mut rng, 3, 3);
        for i in 0..=3 {
            for j in 0..=3 {
                let nested = eq.g_op(i, &eq.g_op(j, &x).unwrap()).unwrap();
                assert!(close(&nested, &eq.g_op(i + j, &x).unwrap(), 1e-12), "i={i} j={j}");
            }
        }
    }

    #[test]
    fn product_form_matches_composition_for_both_kinds() {
        let ops = [
            PeriodicOperator::conjugate(),
            PeriodicOperator::transpose(),
            PeriodicOperator::anti_transpose(),
            PeriodicOperator::hermitian(),
        ];
        for (s, op) in ops.into_iter().enumerate() {
            let eq = random_eq(60 + s as u64, 3, op);
            let mut rng = random::rng(600 + s as u64);
            let x = random::complex_matrix(&mut rng, 3, 3);
            for i in 0..=7 {
                let lhs = eq.product_form(i, &x).unwrap();
                let rhs = eq.h_op(i, &x).unwrap();
                assert!(close(&lhs, &rhs, 1e-12), "{} i={i}", eq.op().name());
            }
        }
    }

    #[test]
    fn stein_closed_forms_for_period_two() {
        let t = random_eq(7, 3, PeriodicOperator::transpose());
        let s = t.build_stein().unwrap();
        let (a, b, c) = (t.a(), t.b(), t.c());
        assert!(close(&s.a, &(a * &b.transpose()), 1e-14));
        assert!(close(&s.b, &(&a.transpose() * b), 1e-14));
        assert!(close(&s.c, &(c + &(&(a * &c.transpose()) * b)), 1e-14));

        let k = random_eq(8, 3, PeriodicOperator::conjugate());
        let s = k.build_stein().unwrap();
        let (a, b, c) = (k.a(), k.b(), k.c());
        assert!(close(&s.a, &(a * &a.conj()), 1e-14));
        assert!(close(&s.b, &(&b.conj() * b), 1e-14));
        assert!(close(&s.c, &(c + &(&(a * &c.conj()) * b)), 1e-14));
    }

    #[test]
    fn scalar_counterexample_gives_identity_equation() {
        let s = counterexample(3.0).build_stein().unwrap();
        assert_eq!(s, SteinSystem::new(scalar(1.0), scalar(1.0), scalar(0.0)).unwrap());
        let s3 = counterexample(3.0).build_stein_kn(3).unwrap();
        assert_eq!(s3, SteinSystem::new(scalar(1.0), scalar(1.0), scalar(0.0)).unwrap());
    }

    #[test]
    fn stein_kn_accumulates_geometrically() {
        let eq = random_eq(9, 3, PeriodicOperator::anti_transpose());
        let s1 = eq.build_stein().unwrap();
        assert_eq!(eq.build_stein_kn(1).unwrap(), s1);
        let s2 = eq.build_stein_kn(2).unwrap();
        let expected = &s1.c + &(&(&s1.a * &s1.c) * &s1.b);
        assert!(close(&s2.c, &expected, 1e-12));
        assert!(close(&s2.a, &(&s1.a * &s1.a), 1e-12));
        assert!(eq.build_stein_kn(0).is_err());
    }

    #[test]
    fn longer_reversing_periods_match_composition() {
        // declared periods 4 and 6 for transpose exercise products beyond two factors
        for period in [4, 6] {
            let op = PeriodicOperator::transpose().with_period(period).unwrap();
            let eq = random_eq(70 + period as u64, 3, op);
            let s = eq.build_stein().unwrap();
            let mut rng = random::rng(700 + period as u64);
            let x = random::complex_matrix(&mut rng, 3, 3);
            assert!(close(&eq.compose_o(period, &x).unwrap(), &s.apply(&x), 1e-11), "period {period}");
        }
    }

    #[test]
    fn odd_period_reversing_on_scalars() {
        // order reversal is only compatible with an odd period when matrices commute, i.e. m = 1
        let op = PeriodicOperator::custom("scalar_reversing", 3, OrderKind::Reversing, Some(1), Matrix::clone).unwrap();
        let eq = LinearMatrixEquation::new(
            Matrix::scalar(C64::new(0.3, 0.1)),
            Matrix::scalar(C64::new(-0.5, 0.2)),
            Matrix::scalar(C64::new(1.0, -1.0)),
            op,
        )
        .unwrap();
        let s = eq.build_stein().unwrap();
        let x = Matrix::scalar(C64::new(0.7, 0.4));
        assert!(close(&eq.compose_o(3, &x).unwrap(), &s.apply(&x), 1e-14));
    }

    #[test]
    fn input_shape_errors() {
        let eq = random_eq(10, 3, PeriodicOperator::transpose());
        assert!(eq.apply_o(&Matrix::zeros(2, 2)).is_err());
        assert!(LinearMatrixEquation::new(Matrix::identity(2), Matrix::identity(3), Matrix::identity(2), PeriodicOperator::transpose())
            .is_err());
        let p = PeriodicOperator::perm_similarity(&Permutation::primary(4));
        assert!(LinearMatrixEquation::new(Matrix::identity(3), Matrix::identity(3), Matrix::identity(3), p).is_err());
    }
}
