//! Spectral solvability diagnostics.
//!
//! Reciprocal-freeness of `σ(𝒜)` and `σ(ℬ)` is sufficient for a unique
//! solution of the Stein equation, and therefore of the original equation.
//! It is not necessary in general. For the anti-transpose operator an exact
//! characterization is available through the spectrum of `A f(B)`.

use crate::error::Result;
use crate::linalg::{self, Matrix, Spectrum, C64};
use crate::operators::PeriodicOperator;
use crate::stein::SteinSystem;

/// Default tolerance of the reciprocal-free predicate.
pub const DEFAULT_RECIPROCAL_TOL: f64 = 1e-8;

/// `true` when no `λ ∈ s2`, `μ ∈ s1` satisfy `|λμ − 1| ≤ tol (1 + |λ||μ|)`.
///
/// Zero is the reciprocal of infinity only, and finite spectra never contain
/// infinity, so a zero eigenvalue never causes a violation.
pub fn reciprocal_free(s1: &Spectrum, s2: &Spectrum, tol: f64) -> bool {
    closest_reciprocal_gap(s1, s2).is_none_or(|gap| gap > tol)
}

/// Smallest `|λμ − 1| / (1 + |λ||μ|)` over all pairs, `None` if either set is empty.
pub fn closest_reciprocal_gap(s1: &Spectrum, s2: &Spectrum) -> Option<f64> {
    let mut best: Option<f64> = None;
    for mu in s1.values() {
        for lambda in s2.values() {
            let gap = (lambda * mu - 1.0).norm() / (1.0 + lambda.norm() * mu.norm());
            best = Some(best.map_or(gap, |b| b.min(gap)));
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvabilityReport {
    pub spectrum_a: Spectrum,
    pub spectrum_b: Spectrum,
    pub reciprocal_free: bool,
    pub rho: f64,
    pub rho_lt_one: bool,
    pub notes: Vec<String>,
}

/// Spectra of the Stein coefficients with the reciprocal-free and `ρ < 1` flags.
pub fn check_unique(s: &SteinSystem, tol: f64) -> Result<SolvabilityReport> {
    let spectrum_a = linalg::eigenvalues(&s.a)?;
    let spectrum_b = linalg::eigenvalues(&s.b)?;
    let rho = spectrum_a.max_abs() * spectrum_b.max_abs();
    let free = reciprocal_free(&spectrum_a, &spectrum_b, tol);
    let mut notes = Vec::new();
    if free {
        notes.push(
            "σ(𝒜), σ(ℬ) reciprocal free: the Stein equation and the original equation are uniquely solvable (sufficient condition)"
                .to_string(),
        );
    } else {
        notes.push(
            "σ(𝒜), σ(ℬ) not reciprocal free: the Stein equation is singular; the original equation may still be uniquely solvable"
                .to_string(),
        );
    }
    if let Some(gap) = closest_reciprocal_gap(&spectrum_a, &spectrum_b) {
        if free && gap <= 1e3 * tol {
            notes.push(format!("near-reciprocal pair: relative gap {gap:.3e}"));
        }
    }
    if rho < 1.0 {
        notes.push(format!("ρ(𝒜)ρ(ℬ) = {rho:.6} < 1: Smith-type iterations converge"));
    } else {
        notes.push(format!("ρ(𝒜)ρ(ℬ) = {rho:.6} >= 1: Smith-type iterations are not guaranteed to converge"));
    }
    Ok(SolvabilityReport {
        spectrum_a,
        spectrum_b,
        reciprocal_free: free,
        rho,
        rho_lt_one: rho < 1.0,
        notes,
    })
}

/// The `m² × m²` permutation with `𝒫 vec(X) = vec(f(X))` for the anti-transpose `f`:
/// `𝒫 = Σ_{i,j} e_{m+1-j} e_{m+1-i}ᵀ ⊗ e_i e_jᵀ` (1-based).
pub fn anti_transpose_perm(m: usize) -> Matrix {
    let mut p = Matrix::zeros(m * m, m * m);
    for i in 0..m {
        for j in 0..m {
            // block row m-1-j, block column m-1-i, inner entry (i, j)
            let row = (m - 1 - j) * m + i;
            let col = (m - 1 - i) * m + j;
            p[(row, col)] = linalg::ONE;
        }
    }
    p
}

/// `(Bᵀ ⊗ A) 𝒫`, the Kronecker form of `X ↦ A f(X) B` for the anti-transpose.
pub fn anti_transpose_kron(a: &Matrix, b: &Matrix) -> Matrix {
    &b.transpose().kron(a) * &anti_transpose_perm(a.rows())
}

/// Predicted spectrum of `(Bᵀ ⊗ A) 𝒫`: every `λ_i` plus `±√(λ_i λ_j)` for
/// `i < j`, where `λ = σ(A f(B))` and `√` is the principal root.
pub fn anti_transpose_spectrum_prediction(a: &Matrix, b: &Matrix) -> Result<Spectrum> {
    let fb = PeriodicOperator::anti_transpose().apply(b)?;
    let lambdas = linalg::eigenvalues(&a.matmul(&fb)?)?;
    let l = lambdas.values();
    let mut out = l.to_vec();
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            let r = (l[i] * l[j]).sqrt();
            out.push(r);
            out.push(-r);
        }
    }
    Ok(Spectrum::new(out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntiTransposeReport {
    /// `σ(A f(B))`.
    pub spectrum: Spectrum,
    /// Eigenvalues within `tol` of −1.
    pub minus_one_count: usize,
    /// Condition (1): `σ(A f(B)) ∖ {−1}` is reciprocal free.
    pub reciprocal_free_without_minus_one: bool,
    /// Condition (2): −1 is at most a simple eigenvalue.
    pub minus_one_simple: bool,
    pub unique: bool,
}

/// Exact unique-solvability test for `X = A f(X) B + C` with the anti-transpose `f`.
pub fn anti_transpose_unique(a: &Matrix, b: &Matrix, tol: f64) -> Result<AntiTransposeReport> {
    let fb = PeriodicOperator::anti_transpose().apply(b)?;
    let spectrum = linalg::eigenvalues(&a.matmul(&fb)?)?;
    let minus_one = C64::new(-1.0, 0.0);
    let minus_one_count = spectrum.count_near(minus_one, tol);
    let rest = Spectrum::new(
        spectrum
            .values()
            .iter()
            .copied()
            .filter(|z| (z - minus_one).norm() > tol)
            .collect(),
    );
    let free = reciprocal_free(&rest, &rest, tol);
    let simple = minus_one_count <= 1;
    Ok(AntiTransposeReport {
        spectrum,
        minus_one_count,
        reciprocal_free_without_minus_one: free,
        minus_one_simple: simple,
        unique: free && simple,
    })
}
