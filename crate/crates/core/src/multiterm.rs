//! `X = Σ_k A_k f_k(X) B_k + C` over a homogeneous period-`n` family.
//!
//! The family `{f_k}` is homogeneous of period `n` when its members commute
//! pairwise and every composition `f_0^(i_0) ∘ … ∘ f_{N-1}^(i_{N-1})` with
//! `Σ i_j = n` is the identity. Then `n` compositions of the right-hand side
//! give the generalized Stein equation `𝒳 = K_n(𝒳) + Σ_{i<n} K_i(C)` with
//!
//! ```text
//! K_0(X) = X,   K_{i+1}(X) = Σ_k A_k f_k(K_i(X)) B_k.
//! ```
//!
//! `K_n` is ℂ-linear even when the family contains conjugations, because every
//! tuple in `K_n` applies an identity composition to `X`. That is checked
//! numerically during assembly rather than assumed.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, C64};
use crate::operators::{OrderKind, PeriodicOperator};
use crate::random;
use crate::solvers::{solve_linearized, Method, SolveReport};

/// Seed, trial count and tolerance used by the homogeneity check inside
/// [`build_generalized_stein`].
const BUILD_CHECK_SEED: u64 = 0x6d74;
const BUILD_CHECK_TRIALS: usize = 3;
const BUILD_CHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Term {
    pub a: Matrix,
    pub b: Matrix,
    pub op: PeriodicOperator,
}

#[derive(Debug, Clone)]
pub struct MultiTermEquation {
    terms: Vec<Term>,
    c: Matrix,
    n: usize,
}

impl MultiTermEquation {
    /// Validates shapes and rejects order-reversing members. Homogeneity is
    /// checked separately by [`check_homogeneous`].
    pub fn new(terms: Vec<Term>, c: Matrix, n: usize) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("at least one term is required".into()));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("period must be positive".into()));
        }
        let m = c.require_square("constant C")?;
        for (k, t) in terms.iter().enumerate() {
            for (name, mat) in [("A", &t.a), ("B", &t.b)] {
                if mat.shape() != (m, m) {
                    return Err(Error::DimensionMismatch {
                        context: "MultiTermEquation::new",
                        expected: format!("terms[{k}].{name} of size {m}x{m}"),
                        found: format!("{}x{}", mat.rows(), mat.cols()),
                    });
                }
            }
            if t.op.kind() != OrderKind::Preserving {
                return Err(Error::UnsupportedOperator {
                    operation: "multi-term equation",
                    reason: format!("terms[{k}] operator `{}` is order reversing", t.op.name()),
                });
            }
            if let Some(d) = t.op.dimension() {
                if d != m {
                    return Err(Error::DimensionMismatch {
                        context: "MultiTermEquation::new",
                        expected: format!("terms[{k}] operator on {m}x{m}"),
                        found: format!("{d}x{d}"),
                    });
                }
            }
        }
        Ok(Self { terms, c, n })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn period(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.c.rows()
    }

    pub fn family(&self) -> Vec<PeriodicOperator> {
        self.terms.iter().map(|t| t.op.clone()).collect()
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        self.c.require_same_shape(x, "multi-term input")
    }

    fn k_step(&self, x: &Matrix) -> Matrix {
        let m = self.dim();
        self.terms.iter().fold(Matrix::zeros(m, m), |acc, t| {
            &acc + &(&(&t.a * &t.op.apply_unchecked(x)) * &t.b)
        })
    }

    /// `𝒪(X) = Σ_k A_k f_k(X) B_k + C`.
    pub fn apply_o(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        Ok(&self.k_step(x) + &self.c)
    }

    /// `‖X − Σ_k A_k f_k(X) B_k − C‖_F`.
    pub fn residual(&self, x: &Matrix) -> Result<f64> {
        Ok((x - &self.apply_o(x)?).frob_norm())
    }

    /// `K_i(X)` by the one-layer recursion.
    pub fn k_op(&self, i: usize, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        Ok((0..i).fold(x.clone(), |acc, _| self.k_step(&acc)))
    }

    /// `K_i(X)` by enumerating all `N^i` index sequences `(k_1, …, k_i)`:
    /// with `g_j = f_{k_1} ∘ … ∘ f_{k_j}`, each contributes
    /// `Π_j g_{j-1}(A_{k_j}) · g_i(X) · Π_{j desc} g_{j-1}(B_{k_j})`.
    pub fn k_tuple_sum(&self, i: usize, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let m = self.dim();
        let mut total = Matrix::zeros(m, m);
        for seq in sequences(self.terms.len(), i) {
            let (left, right, image) = self.tuple_factors(&seq, x);
            total = &total + &(&(&left * &image) * &right);
        }
        Ok(total)
    }

    /// `(L, R, g_i(x))` for one index sequence, outermost index first.
    fn tuple_factors(&self, seq: &[usize], x: &Matrix) -> (Matrix, Matrix, Matrix) {
        let m = self.dim();
        let mut left = Matrix::identity(m);
        let mut rights = Vec::with_capacity(seq.len());
        let mut applied: Vec<&PeriodicOperator> = Vec::with_capacity(seq.len());
        let g = |ops: &[&PeriodicOperator], y: &Matrix| {
            // g = f_{k_1} ∘ … ∘ f_{k_j}: innermost applied first
            ops.iter().rev().fold(y.clone(), |acc, f| f.apply_unchecked(&acc))
        };
        for &k in seq {
            let t = &self.terms[k];
            left = &left * &g(&applied, &t.a);
            rights.push(g(&applied, &t.b));
            applied.push(&t.op);
        }
        let right = rights
            .iter()
            .rev()
            .fold(Matrix::identity(m), |acc, r| &acc * r);
        (left, right, g(&applied, x))
    }
}

/// All sequences of length `len` over `0..n`.
fn sequences(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..n).map(move |k| {
                    let mut t = s.clone();
                    t.push(k);
                    t
                })
            })
            .collect();
    }
    out
}

/// Exponent tuples `(i_0, …, i_{parts-1})` of non-negative integers summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport {
    pub period: usize,
    pub dimension: usize,
    /// Largest relative `‖f_i(f_j(X)) − f_j(f_i(X))‖` over pairs and trials.
    pub commuting_max_err: f64,
    /// Largest relative deviation of an `n`-fold composition from the identity.
    pub identity_max_err: f64,
    pub tuples_checked: usize,
    /// First failing exponent tuple, if any.
    pub failing_tuple: Option<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub passed: bool,
}

/// Randomized check of pairwise commutation and of every `n`-fold
/// composition being the identity. Deterministic per seed.
pub fn check_homogeneous(
    family: &[PeriodicOperator],
    n: usize,
    m: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> HomogeneityReport {
    let mut rng = random::stream(seed, 0x686f);
    let rel = |l: &Matrix, r: &Matrix| (l - r).frob_norm() / (1.0 + l.frob_norm());
    let mut commuting_max_err: f64 = 0.0;
    let mut identity_max_err: f64 = 0.0;
    let mut failing_tuple = None;
    let tuples = if family.is_empty() { Vec::new() } else { compositions(n, family.len()) };
    for _ in 0..trials.max(1) {
        let x = random::complex_matrix(&mut rng, m, m);
        for (i, fi) in family.iter().enumerate() {
            for fj in &family[i + 1..] {
                let l = fi.apply_unchecked(&fj.apply_unchecked(&x));
                let r = fj.apply_unchecked(&fi.apply_unchecked(&x));
                commuting_max_err = commuting_max_err.max(rel(&l, &r));
            }
        }
        for tuple in &tuples {
            let y = family
                .iter()
                .zip(tuple)
                .rev()
                .fold(x.clone(), |acc, (f, &e)| f.power_unchecked(e, &acc));
            let err = rel(&y, &x);
            if !(err <= tol) && failing_tuple.is_none() {
                failing_tuple = Some(tuple.clone());
            }
            identity_max_err = identity_max_err.max(err);
        }
    }
    let passed = !family.is_empty()
        && family.iter().all(|f| f.kind() == OrderKind::Preserving && f.dimension().is_none_or(|d| d == m))
        && commuting_max_err <= tol
        && identity_max_err <= tol;
    HomogeneityReport {
        period: n,
        dimension: m,
        commuting_max_err,
        identity_max_err,
        tuples_checked: tuples.len(),
        failing_tuple,
        trials: trials.max(1),
        seed,
        tol,
        passed,
    }
}

/// `vec(K_n(X)) = M vec(X)` plus the constant `Σ_{i<n} K_i(C)`.
#[derive(Debug, Clone)]
pub struct GeneralizedStein {
    pub kron: Matrix,
    pub constant: Matrix,
}

/// Assembles `M` column by column from `K_n` applied to the matrix units.
pub fn build_generalized_stein(mte: &MultiTermEquation) -> Result<GeneralizedStein> {
    let (m, n) = (mte.dim(), mte.period());
    let report = check_homogeneous(&mte.family(), n, m, BUILD_CHECK_TRIALS, BUILD_CHECK_SEED, BUILD_CHECK_TOL);
    if !report.passed {
        return Err(Error::NotHomogeneous {
            period: n,
            reason: format!(
                "commuting error {:.3e}, identity error {:.3e}",
                report.commuting_max_err, report.identity_max_err
            ),
        });
    }
    let mut kron = Matrix::zeros(m * m, m * m);
    for col in 0..m {
        for row in 0..m {
            let mut unit = Matrix::zeros(m, m);
            unit[(row, col)] = linalg::ONE;
            let image = mte.k_op(n, &unit)?.vec();
            let j = col * m + row;
            for i in 0..m * m {
                kron[(i, j)] = image[(i, 0)];
            }
        }
    }
    // ℂ-linearity: M vec(X) must reproduce K_n(X) for complex X.
    let x = random::complex_matrix(&mut random::stream(BUILD_CHECK_SEED, 1), m, m);
    let direct = mte.k_op(n, &x)?;
    let via = Matrix::unvec(&(&kron * &x.vec()), m, m)?;
    let err = (&direct - &via).frob_norm() / (1.0 + direct.frob_norm());
    if err > 1e-10 {
        return Err(Error::NotHomogeneous {
            period: n,
            reason: format!("K_n is not complex linear (mismatch {err:.3e})"),
        });
    }
    let constant = (0..n).try_fold(Matrix::zeros(m, m), |acc, i| Ok::<_, Error>(&acc + &mte.k_op(i, &mte.c)?))?;
    Ok(GeneralizedStein { kron, constant })
}

/// `M` by tuple enumeration: `Σ_t R_tᵀ ⊗ L_t` over all `N^n` sequences.
/// Exponential in `n`; a test oracle for [`build_generalized_stein`].
pub fn kron_by_tuples(mte: &MultiTermEquation) -> Result<Matrix> {
    let m = mte.dim();
    let probe = Matrix::zeros(m, m);
    let mut total = Matrix::zeros(m * m, m * m);
    for seq in sequences(mte.terms.len(), mte.period()) {
        let (left, right, _) = mte.tuple_factors(&seq, &probe);
        total = &total + &right.transpose().kron(&left);
    }
    Ok(total)
}

/// Orbit average `(1/n) Σ_{i<n} 𝒪^(i)(𝒳)`.
pub fn recover(mte: &MultiTermEquation, x: &Matrix) -> Result<Matrix> {
    mte.check_input(x)?;
    let n = mte.period();
    let mut cur = x.clone();
    let mut sum = Matrix::zeros(mte.dim(), mte.dim());
    for _ in 0..n {
        sum = &sum + &cur;
        cur = &mte.k_step(&cur) + &mte.c;
    }
    Ok(sum.scale_real(1.0 / n as f64))
}

/// `(1/n) Σ_{i<n} (K_i(𝒳) + (n − i − 1) K_i(C))`.
pub fn recover_explicit(mte: &MultiTermEquation, x: &Matrix) -> Result<Matrix> {
    mte.check_input(x)?;
    let n = mte.period();
    let mut sum = Matrix::zeros(mte.dim(), mte.dim());
    let (mut kx, mut kc) = (x.clone(), mte.c.clone());
    for i in 0..n {
        sum = &(&sum + &kx) + &kc.scale_real((n - i - 1) as f64);
        kx = mte.k_step(&kx);
        kc = mte.k_step(&kc);
    }
    Ok(sum.scale_real(1.0 / n as f64))
}

/// Generalized Stein solve followed by orbit-average recovery. `tol` bounds
/// the relative generalized-Stein residual accepted before recovery.
pub fn solve_multiterm(mte: &MultiTermEquation, tol: f64) -> Result<SolveReport> {
    let gs = build_generalized_stein(mte)?;
    let m = mte.dim();
    let mut warnings = Vec::new();
    let (rho, unique) = match linalg::eigenvalues(&gs.kron) {
        Ok(spec) => (spec.max_abs(), spec.count_near(C64::new(1.0, 0.0), 1e-8) == 0),
        Err(e) => {
            warnings.push(format!("spectral diagnostics unavailable: {e}"));
            (f64::NAN, false)
        }
    };
    let x = solve_linearized(&gs.kron, &gs.constant, &mut warnings)?;
    let image = &Matrix::unvec(&(&gs.kron * &x.vec()), m, m)? + &gs.constant;
    let stein_residual = (&x - &image).frob_norm();
    let scale = x.frob_norm() + image.frob_norm();
    let relative = if scale == 0.0 { stein_residual } else { stein_residual / scale };
    if relative > tol {
        return Err(Error::NotASteinSolution { residual: relative, tol });
    }
    let solution = recover(mte, &x)?;
    Ok(SolveReport {
        eq_residual: mte.residual(&solution)?,
        stein_residual,
        stein_solution: x,
        solution,
        iterations: 0,
        method: Method::Direct,
        rho,
        reciprocal_free: unique,
        unique,
        warnings,
    })
}
