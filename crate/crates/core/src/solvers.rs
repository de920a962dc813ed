//! Stein solvers and the end-to-end pipeline.
//!
//! - direct: `vec(𝒳) = (I − ℬᵀ⊗𝒜)⁻¹ vec(𝒞)`, with a least-squares fallback
//!   when the linearization is singular;
//! - Smith: `X_{k+1} = 𝒜 X_k ℬ + 𝒞`, `X_0 = 0`;
//! - Smith(ℓ): `X_{k+1} = 𝒜^ℓ X_k ℬ^ℓ + Σ_{i<ℓ} 𝒜^i 𝒞 ℬ^i`;
//! - r-Smith: `X_{k+1} = Σ_{i<r} A_k^i X_k B_k^i`, `A_{k+1} = A_k^r`,
//!   `B_{k+1} = B_k^r`, starting from `(𝒜, ℬ, 𝒞)`.
//!
//! All iterations stop once `‖X_{k+1} − X_k‖_F ≤ tol (1 + ‖X_{k+1}‖_F)`.
//!
//! [`solve`] chains the Stein construction, one of the solvers and recovery.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::recovery::Recovery;
use crate::solvability::{self, DEFAULT_RECIPROCAL_TOL};
use crate::stein::{LinearMatrixEquation, SteinSystem};

/// Pivot threshold of the least-squares fallback, relative to the largest pivot.
pub const LSTSQ_RANK_TOL: f64 = 1e-10;

/// Largest least-squares residual, relative to `1 + ‖rhs‖`, still treated as consistent.
pub const CONSISTENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Smith,
    SmithL,
    RSmith,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Smith => "smith",
            Method::SmithL => "smith-l",
            Method::RSmith => "r-smith",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "smith" => Ok(Method::Smith),
            "smith-l" | "smith_l" => Ok(Method::SmithL),
            "r-smith" | "r_smith" => Ok(Method::RSmith),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

/// What the r-Smith step accumulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RSmithVariant {
    /// `X_{k+1} = Σ_{i<r} A_k^i X_k B_k^i`. Converges to the Stein solution.
    #[default]
    Accumulate,
    /// `X_{k+1} = Σ_{i<r} A_k^i 𝒞 B_k^i`. Kept for comparison only; its limit
    /// is not the Stein solution in general.
    LiteralConstant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    /// Block length of Smith(ℓ).
    pub ell: usize,
    /// Power of r-Smith.
    pub r: usize,
    pub r_smith_variant: RSmithVariant,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::Direct,
            tol: 1e-12,
            max_iter: 10_000,
            ell: 2,
            r: 2,
            r_smith_variant: RSmithVariant::Accumulate,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if self.method == Method::SmithL && self.ell == 0 {
            return Err(Error::InvalidParameter("ell must be positive".into()));
        }
        if self.method == Method::RSmith && self.r < 2 {
            return Err(Error::InvalidParameter(format!("r must be at least 2, got {}", self.r)));
        }
        Ok(())
    }
}

/// Result of an iterative Stein solve.
#[derive(Debug, Clone)]
pub struct IterativeSolution {
    pub solution: Matrix,
    pub iterations: usize,
    pub converged: bool,
    /// `‖X_{k+1} − X_k‖_F` of the final step.
    pub last_update: f64,
}

/// Smith iterates `X_1, X_2, …` (`X_0 = 0` is not yielded).
#[derive(Debug, Clone)]
pub struct SmithIter<'a> {
    s: &'a SteinSystem,
    x: Matrix,
}

impl<'a> SmithIter<'a> {
    pub fn new(s: &'a SteinSystem) -> Self {
        Self {
            s,
            x: Matrix::zeros(s.dim(), s.dim()),
        }
    }
}

impl Iterator for SmithIter<'_> {
    type Item = Matrix;

    fn next(&mut self) -> Option<Matrix> {
        self.x = self.s.apply(&self.x);
        Some(self.x.clone())
    }
}

/// Smith(ℓ) iterates `X_1, X_2, …`, where `X_k` is the Smith iterate `X_{kℓ}`.
#[derive(Debug, Clone)]
pub struct SmithLIter {
    a_pow: Matrix,
    b_pow: Matrix,
    block: Matrix,
    x: Matrix,
}

impl SmithLIter {
    pub fn new(s: &SteinSystem, ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidParameter("ell must be positive".into()));
        }
        let m = s.dim();
        let mut block = Matrix::zeros(m, m);
        let mut term = s.c.clone();
        for _ in 0..ell {
            block = &block + &term;
            term = &(&s.a * &term) * &s.b;
        }
        Ok(Self {
            a_pow: s.a.pow(ell)?,
            b_pow: s.b.pow(ell)?,
            block,
            x: Matrix::zeros(m, m),
        })
    }
}

impl Iterator for SmithLIter {
    type Item = Matrix;

    fn next(&mut self) -> Option<Matrix> {
        self.x = &(&(&self.a_pow * &self.x) * &self.b_pow) + &self.block;
        Some(self.x.clone())
    }
}

/// r-Smith iterates `X_0 = 𝒞, X_1, …`.
#[derive(Debug, Clone)]
pub struct RSmithIter {
    a_k: Matrix,
    b_k: Matrix,
    c: Matrix,
    x: Option<Matrix>,
    r: usize,
    variant: RSmithVariant,
}

impl RSmithIter {
    pub fn new(s: &SteinSystem, r: usize, variant: RSmithVariant) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParameter(format!("r must be at least 2, got {r}")));
        }
        Ok(Self {
            a_k: s.a.clone(),
            b_k: s.b.clone(),
            c: s.c.clone(),
            x: None,
            r,
            variant,
        })
    }
}

impl Iterator for RSmithIter {
    type Item = Matrix;

    fn next(&mut self) -> Option<Matrix> {
        let Some(x) = &self.x else {
            self.x = Some(self.c.clone());
            return self.x.clone();
        };
        let seed = match self.variant {
            RSmithVariant::Accumulate => x,
            RSmithVariant::LiteralConstant => &self.c,
        };
        // Σ_{i<r} A^i X B^i, accumulated together with A^r and B^r
        let mut sum = seed.clone();
        let mut term = seed.clone();
        let mut a_pow = self.a_k.clone();
        let mut b_pow = self.b_k.clone();
        for _ in 1..self.r {
            term = &(&self.a_k * &term) * &self.b_k;
            sum = &sum + &term;
            a_pow = &a_pow * &self.a_k;
            b_pow = &b_pow * &self.b_k;
        }
        self.a_k = a_pow;
        self.b_k = b_pow;
        self.x = Some(sum);
        self.x.clone()
    }
}

fn run(
    method: &'static str,
    s: &SteinSystem,
    first: Option<Matrix>,
    iter: impl Iterator<Item = Matrix>,
    cfg: &SolverConfig,
) -> Result<IterativeSolution> {
    let m = s.dim();
    let mut prev = first.unwrap_or_else(|| Matrix::zeros(m, m));
    let mut last_update = f64::INFINITY;
    let mut iterations = 0;
    for x in iter.take(cfg.max_iter) {
        iterations += 1;
        if !x.is_finite() {
            return Err(Error::Divergence {
                method,
                iterations,
                rho: s.rho().unwrap_or(f64::NAN),
                last_update: f64::INFINITY,
            });
        }
        last_update = (&x - &prev).frob_norm();
        let done = last_update <= cfg.tol * (1.0 + x.frob_norm());
        prev = x;
        if done {
            return Ok(IterativeSolution {
                solution: prev,
                iterations,
                converged: true,
                last_update,
            });
        }
    }
    let rho = s.rho().unwrap_or(f64::NAN);
    if !(rho < 1.0) {
        return Err(Error::Divergence {
            method,
            iterations,
            rho,
            last_update,
        });
    }
    Ok(IterativeSolution {
        solution: prev,
        iterations,
        converged: false,
        last_update,
    })
}

pub fn solve_smith(s: &SteinSystem, cfg: &SolverConfig) -> Result<IterativeSolution> {
    cfg.validate()?;
    run("smith", s, None, SmithIter::new(s), cfg)
}

pub fn solve_smith_l(s: &SteinSystem, cfg: &SolverConfig) -> Result<IterativeSolution> {
    cfg.validate()?;
    run("smith-l", s, None, SmithLIter::new(s, cfg.ell)?, cfg)
}

/// r-Smith; `iterations` counts squaring steps after `X_0 = 𝒞`.
pub fn solve_r_smith(s: &SteinSystem, cfg: &SolverConfig) -> Result<IterativeSolution> {
    cfg.validate()?;
    if cfg.r < 2 {
        return Err(Error::InvalidParameter(format!("r must be at least 2, got {}", cfg.r)));
    }
    let mut iter = RSmithIter::new(s, cfg.r, cfg.r_smith_variant)?;
    let x0 = iter.next().expect("r-Smith yields X_0");
    run("r-smith", s, Some(x0), iter, cfg)
}

/// `vec⁻¹((I − ℬᵀ⊗𝒜)⁻¹ vec(𝒞))`. Fails with [`Error::Singular`] when the
/// linearization is singular to working precision.
pub fn solve_direct(s: &SteinSystem) -> Result<Matrix> {
    let m = s.dim();
    let lhs = &Matrix::identity(m * m) - &s.kron_operator();
    let v = linalg::solve_dense(&lhs, &s.c.vec())?;
    Matrix::unvec(&v, m, m)
}

/// Solves `vec(X) = K vec(X) + vec(c)` for an `m² × m²` operator `K`,
/// falling back to least squares when `I − K` is singular. The fallback
/// pushes a warning; an inconsistent system is an error.
pub fn solve_linearized(k: &Matrix, c: &Matrix, warnings: &mut Vec<String>) -> Result<Matrix> {
    let (rows, cols) = c.shape();
    let lhs = &Matrix::identity(rows * cols) - k;
    let rhs = c.vec();
    match linalg::solve_dense(&lhs, &rhs) {
        Ok(v) => Matrix::unvec(&v, rows, cols),
        Err(Error::Singular { rcond }) => {
            let ls = linalg::lstsq(&lhs, &rhs, LSTSQ_RANK_TOL)?;
            if ls.residual > CONSISTENCY_TOL * (1.0 + rhs.frob_norm()) {
                return Err(Error::Inconsistent {
                    residual: ls.residual,
                });
            }
            warnings.push(format!(
                "linearization singular (rcond {rcond:.3e}); using a least-squares particular solution (rank {} of {})",
                ls.rank,
                rows * cols
            ));
            Matrix::unvec(&ls.solution, rows, cols)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Solution of the original equation.
    pub solution: Matrix,
    /// The Stein solution it was recovered from.
    pub stein_solution: Matrix,
    /// `‖𝒳 − 𝒜𝒳ℬ − 𝒞‖_F`.
    pub stein_residual: f64,
    /// `‖X − A f(X) B − C‖_F` (or the multi-term analogue).
    pub eq_residual: f64,
    pub iterations: usize,
    pub method: Method,
    /// `ρ(𝒜) ρ(ℬ)`; NaN when the eigenvalue iteration failed.
    pub rho: f64,
    pub reciprocal_free: bool,
    pub unique: bool,
    pub warnings: Vec<String>,
}

/// Runs the configured method on a Stein system. Direct solves go through
/// [`solve_linearized`], so singular but consistent systems still succeed.
pub fn solve_stein(s: &SteinSystem, cfg: &SolverConfig, warnings: &mut Vec<String>) -> Result<IterativeSolution> {
    cfg.validate()?;
    let out = match cfg.method {
        Method::Direct => {
            let x = solve_linearized(&s.kron_operator(), &s.c, warnings)?;
            return Ok(IterativeSolution {
                solution: x,
                iterations: 0,
                converged: true,
                last_update: 0.0,
            });
        }
        Method::Smith => solve_smith(s, cfg)?,
        Method::SmithL => solve_smith_l(s, cfg)?,
        Method::RSmith => {
            if cfg.r_smith_variant == RSmithVariant::LiteralConstant {
                warnings.push("literal r-Smith update does not converge to the Stein solution in general".into());
            }
            solve_r_smith(s, cfg)?
        }
    };
    if !out.converged {
        warnings.push(format!(
            "{} stopped at max_iter = {} without meeting tol (last update {:.3e})",
            cfg.method, cfg.max_iter, out.last_update
        ));
    }
    Ok(out)
}

/// Stein construction, Stein solve, recovery, residuals and diagnostics.
pub fn solve(eq: &LinearMatrixEquation, cfg: &SolverConfig) -> Result<SolveReport> {
    let recovery = Recovery::new(eq)?;
    let s = recovery.stein();
    let mut warnings = Vec::new();

    let (rho, reciprocal_free) = match solvability::check_unique(s, DEFAULT_RECIPROCAL_TOL) {
        Ok(r) => (r.rho, r.reciprocal_free),
        Err(e) => {
            warnings.push(format!("spectral diagnostics unavailable: {e}"));
            (f64::NAN, false)
        }
    };
    let mut unique = reciprocal_free;
    if !unique && eq.op().name() == "anti_transpose" && eq.period() == 2 {
        if let Ok(r) = solvability::anti_transpose_unique(eq.a(), eq.b(), DEFAULT_RECIPROCAL_TOL) {
            unique = r.unique;
        }
    }
    if cfg.method != Method::Direct && !(rho < 1.0) {
        warnings.push(format!("ρ(𝒜)ρ(ℬ) = {rho} is not below 1; {} may diverge", cfg.method));
    }

    let stein = solve_stein(s, cfg, &mut warnings)?;
    let solution = recovery.recover(&stein.solution)?;
    Ok(SolveReport {
        stein_residual: s.residual(&stein.solution),
        eq_residual: eq.residual(&solution)?,
        stein_solution: stein.solution,
        solution,
        iterations: stein.iterations,
        method: cfg.method,
        rho,
        reciprocal_free,
        unique,
        warnings,
    })
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

    fn half_one_one() -> SteinSystem {
        SteinSystem::new(scalar(0.5), scalar(1.0), scalar(1.0)).unwrap()
    }

    fn re(m: &Matrix) -> f64 {
        m[(0, 0)].re
    }

    #[test]
    fn direct_examples() {
        assert!((re(&solve_direct(&half_one_one()).unwrap()) - 2.0).abs() < 1e-15);

        let mut rng = random::rng(1);
        let c = random::complex_matrix(&mut rng, 3, 3);
        let s = SteinSystem::new(Matrix::zeros(3, 3), random::complex_matrix(&mut rng, 3, 3), c.clone()).unwrap();
        assert!((&solve_direct(&s).unwrap() - &c).frob_norm() < 1e-15);

        let singular = SteinSystem::new(scalar(1.0), scalar(1.0), scalar(0.0)).unwrap();
        assert!(matches!(solve_direct(&singular), Err(Error::Singular { .. })));
    }

    #[test]
    fn smith_sequences() {
        let s = half_one_one();
        for (k, x) in SmithIter::new(&s).take(20).enumerate() {
            let k = (k + 1) as i32;
            assert!((re(&x) - 2.0 * (1.0 - 0.5f64.powi(k))).abs() < 1e-15);
        }
        for (k, x) in SmithLIter::new(&s, 2).unwrap().take(10).enumerate() {
            let k = (k + 1) as i32;
            assert!((re(&x) - 2.0 * (1.0 - 0.25f64.powi(k))).abs() < 1e-15);
        }
        let plain: Vec<_> = SmithIter::new(&s).take(5).collect();
        let one: Vec<_> = SmithLIter::new(&s, 1).unwrap().take(5).collect();
        assert_eq!(plain, one);
        for (k, x) in RSmithIter::new(&s, 2, RSmithVariant::Accumulate).unwrap().take(6).enumerate() {
            let expected = 2.0 * (1.0 - 0.5f64.powi(1 << k));
            assert!((re(&x) - expected).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn r_smith_five_steps() {
        let s = half_one_one();
        let x = RSmithIter::new(&s, 2, RSmithVariant::Accumulate).unwrap().nth(5).unwrap();
        assert!((re(&x) - 2.0).abs() < 1e-9);
        let out = solve_r_smith(&s, &SolverConfig::with_method(Method::RSmith)).unwrap();
        assert!(out.converged && out.iterations <= 7);
        assert!((re(&out.solution) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn literal_r_smith_differs() {
        let s = half_one_one();
        let cfg = SolverConfig {
            method: Method::RSmith,
            r_smith_variant: RSmithVariant::LiteralConstant,
            ..SolverConfig::default()
        };
        let out = solve_r_smith(&s, &cfg).unwrap();
        // 1 + 0.5^(2^k) → 1, not the Stein solution 2
        assert!((re(&out.solution) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_constant() {
        let s = SteinSystem::new(scalar(0.5), scalar(1.0), scalar(0.0)).unwrap();
        for method in [Method::Smith, Method::SmithL, Method::RSmith] {
            let out = solve_stein(&s, &SolverConfig::with_method(method), &mut Vec::new()).unwrap();
            assert_eq!(out.iterations, 1, "{method}");
            assert_eq!(re(&out.solution), 0.0);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let s = SteinSystem::new(scalar(2.0), scalar(1.0), scalar(1.0)).unwrap();
        for method in [Method::Smith, Method::SmithL, Method::RSmith] {
            let err = solve_stein(&s, &SolverConfig::with_method(method), &mut Vec::new()).unwrap_err();
            assert!(matches!(err, Error::Divergence { .. }), "{method}: {err}");
        }
        // bounded but non-convergent
        let s = SteinSystem::new(scalar(-1.0), scalar(1.0), scalar(1.0)).unwrap();
        let cfg = SolverConfig {
            max_iter: 50,
            ..SolverConfig::with_method(Method::Smith)
        };
        assert!(matches!(solve_smith(&s, &cfg), Err(Error::Divergence { .. })));
    }

    #[test]
    fn methods_agree_on_random_system() {
        let mut rng = random::rng(7);
        let eq = random::equation_with_rho(&mut rng, 3, &PeriodicOperator::transpose(), 0.7).unwrap();
        let s = eq.build_stein().unwrap();
        let direct = solve_direct(&s).unwrap();
        for method in [Method::Smith, Method::SmithL, Method::RSmith] {
            let x = solve_stein(&s, &SolverConfig::with_method(method), &mut Vec::new()).unwrap().solution;
            assert!((&x - &direct).frob_norm() < 1e-9 * (1.0 + direct.frob_norm()), "{method}");
        }
    }

    #[test]
    fn pipeline_transpose() {
        let a = Matrix::from_real(&[&[0.3, 0.1], &[0.0, 0.2]]).unwrap();
        let b = Matrix::from_real(&[&[0.5, 0.0], &[0.2, 0.4]]).unwrap();
        let c = Matrix::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let eq = LinearMatrixEquation::new(a, b, c, PeriodicOperator::transpose()).unwrap();
        let r = solve(&eq, &SolverConfig::default()).unwrap();
        assert!(r.eq_residual <= 1e-10);
        assert!(r.reciprocal_free && r.unique && r.warnings.is_empty());
        let zero = eq.with_constant(Matrix::zeros(2, 2)).unwrap();
        assert_eq!(solve(&zero, &SolverConfig::default()).unwrap().solution.max_abs(), 0.0);
    }

    #[test]
    fn pipeline_counterexample() {
        let op = PeriodicOperator::identity(2);
        let eq = LinearMatrixEquation::new(scalar(-1.0), scalar(1.0), scalar(2.0), op).unwrap();
        let r = solve(&eq, &SolverConfig::default()).unwrap();
        assert_eq!(re(&r.solution), 1.0);
        assert!(!r.reciprocal_free);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            r: 1,
            ..SolverConfig::with_method(Method::RSmith)
        };
        assert!(bad.validate().is_err());
        assert!("smith-l".parse::<Method>().unwrap() == Method::SmithL);
        assert!("newton".parse::<Method>().is_err());
    }
}
