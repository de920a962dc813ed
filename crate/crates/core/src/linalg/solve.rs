//! Dense linear solves: LU with partial pivoting for the square case and
//! column-pivoted Householder QR for rank-deficient least squares.

use super::matrix::{Matrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Reciprocal condition numbers below this are treated as singular.
pub const SINGULAR_RCOND: f64 = 1e-14;

/// LU factorization `P M = L U` of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    norm_one: f64,
}

impl Lu {
    pub fn factor(m: &Matrix) -> Result<Lu> {
        let n = m.require_square("lu")?;
        let norm_one = m.norm_one();
        let mut lu = m.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs == 0.0 {
                return Err(Error::Singular { rcond: 0.0 });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor == ZERO {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= factor * u;
                }
            }
        }
        Ok(Lu {
            n,
            lu,
            perm,
            norm_one,
        })
    }

    fn solve_column(&self, b: &mut [C64]) {
        let n = self.n;
        let permuted: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * b[j];
            }
            b[i] = s / self.lu[i * n + i];
        }
    }

    /// Solves `M Z = rhs` column by column.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        if rhs.rows() != self.n {
            return Err(Error::DimensionMismatch {
                context: "solve_dense",
                expected: format!("{} rows", self.n),
                found: format!("{} rows", rhs.rows()),
            });
        }
        let k = rhs.cols();
        let mut out = Matrix::zeros(self.n, k);
        let mut col = vec![ZERO; self.n];
        for j in 0..k {
            for i in 0..self.n {
                col[i] = rhs[(i, j)];
            }
            self.solve_column(&mut col);
            for i in 0..self.n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }

    /// `1 / (‖M‖₁ ‖M⁻¹‖₁)`, computed from the explicit inverse.
    pub fn rcond(&self) -> f64 {
        if self.norm_one == 0.0 {
            return 0.0;
        }
        let inv = match self.solve(&Matrix::identity(self.n)) {
            Ok(inv) => inv,
            Err(_) => return 0.0,
        };
        let inv_norm = inv.norm_one();
        if !inv_norm.is_finite() || inv_norm == 0.0 {
            return 0.0;
        }
        1.0 / (self.norm_one * inv_norm)
    }
}

/// Solves `M Z = rhs` with partial pivoting. Fails with
/// [`Error::Singular`] when the reciprocal condition estimate drops below
/// [`SINGULAR_RCOND`].
pub fn solve_dense(m: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let lu = Lu::factor(m)?;
    let rcond = lu.rcond();
    if !(rcond >= SINGULAR_RCOND) {
        return Err(Error::Singular { rcond });
    }
    lu.solve(rhs)
}

/// Reciprocal 1-norm condition number of a square matrix (0 when exactly singular).
pub fn rcond(m: &Matrix) -> Result<f64> {
    match Lu::factor(m) {
        Ok(lu) => Ok(lu.rcond()),
        Err(Error::Singular { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Basic least-squares solution of a possibly rank-deficient system.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Matrix,
    /// Numerical rank detected by the pivoted QR.
    pub rank: usize,
    /// `‖M Z − rhs‖_F`.
    pub residual: f64,
}

/// Column-pivoted Householder QR least squares. Columns whose pivot falls
/// below `rank_tol · |R₀₀|` are dropped and their unknowns set to zero.
pub fn lstsq(m: &Matrix, rhs: &Matrix, rank_tol: f64) -> Result<LeastSquares> {
    let (rows, cols) = m.shape();
    if rhs.rows() != rows {
        return Err(Error::DimensionMismatch {
            context: "lstsq",
            expected: format!("{rows} rows"),
            found: format!("{} rows", rhs.rows()),
        });
    }
    let k = rhs.cols();
    let mut a = m.clone();
    let mut b = rhs.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let steps = rows.min(cols);
    let mut diag = Vec::with_capacity(steps);

    for j in 0..steps {
        let col_norm = |a: &Matrix, c: usize| (j..rows).map(|i| a[(i, c)].norm_sqr()).sum::<f64>();
        let (p, _) = (j..cols)
            .map(|c| (c, col_norm(&a, c)))
            .fold((j, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if p != j {
            for i in 0..rows {
                let t = a[(i, j)];
                a[(i, j)] = a[(i, p)];
                a[(i, p)] = t;
            }
            perm.swap(j, p);
        }
        let x: Vec<C64> = (j..rows).map(|i| a[(i, j)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            diag.push(ZERO);
            continue;
        }
        let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq > 0.0 {
            let beta = 2.0 / vnorm_sq;
            for c in j + 1..cols {
                let dot: C64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * a[(j + t, c)]).sum();
                let f = dot * beta;
                for (t, vt) in v.iter().enumerate() {
                    a[(j + t, c)] -= vt * f;
                }
            }
            for c in 0..k {
                let dot: C64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * b[(j + t, c)]).sum();
                let f = dot * beta;
                for (t, vt) in v.iter().enumerate() {
                    b[(j + t, c)] -= vt * f;
                }
            }
        }
        a[(j, j)] = alpha;
        for i in j + 1..rows {
            a[(i, j)] = ZERO;
        }
        diag.push(alpha);
    }

    let lead = diag.first().map_or(0.0, |z| z.norm());
    let rank = diag
        .iter()
        .take_while(|z| lead > 0.0 && z.norm() > rank_tol * lead)
        .count();

    let mut z = Matrix::zeros(cols, k);
    for c in 0..k {
        for i in (0..rank).rev() {
            let mut s = b[(i, c)];
            for t in i + 1..rank {
                s -= a[(i, t)] * z[(t, c)];
            }
            z[(i, c)] = s / a[(i, i)];
        }
    }
    let mut solution = Matrix::zeros(cols, k);
    for (pos, &orig) in perm.iter().enumerate() {
        for c in 0..k {
            solution[(orig, c)] = z[(pos, c)];
        }
    }
    let residual = (&(m * &solution) - rhs).frob_norm();
    Ok(LeastSquares {
        solution,
        rank,
        residual,
    })
}
