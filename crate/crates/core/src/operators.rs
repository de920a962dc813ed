//! Period-`n` matrix operators.
//!
//! An operator `f` is accepted when it is additive, multiplicative in either
//! order (`f(XY) = f(X)f(Y)` or `f(XY) = f(Y)f(X)`), and satisfies
//! `f^(n) = id` for its declared period `n`. The declared period does not
//! have to be minimal. Scalar homogeneity over ℂ is not required, which is
//! what lets the entrywise conjugate in.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::random;

/// Whether `f` keeps or swaps the order of a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrderKind {
    /// `f(XY) = f(X) f(Y)`.
    Preserving,
    /// `f(XY) = f(Y) f(X)`.
    Reversing,
}

impl OrderKind {
    /// Kind of `outer ∘ inner`.
    pub fn compose(self, inner: OrderKind) -> OrderKind {
        if self == inner {
            OrderKind::Preserving
        } else {
            OrderKind::Reversing
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OrderKind::Preserving => "order-preserving",
            OrderKind::Reversing => "order-reversing",
        }
    }
}

/// Permutation stored as `targets[i] = j` when row `i` of the permutation
/// matrix carries its 1 in column `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    targets: Vec<usize>,
}

impl Permutation {
    pub fn from_indices(targets: Vec<usize>) -> Result<Self> {
        let m = targets.len();
        if m == 0 {
            return Err(Error::NotPermutation("empty index array".into()));
        }
        let mut seen = vec![false; m];
        for (row, &t) in targets.iter().enumerate() {
            if t >= m {
                return Err(Error::NotPermutation(format!("row {row} maps to {t}, outside 0..{m}")));
            }
            if std::mem::replace(&mut seen[t], true) {
                return Err(Error::NotPermutation(format!("column {t} is hit twice")));
            }
        }
        Ok(Self { targets })
    }

    /// Reads a 0/1 matrix with exactly one 1 in each row and column.
    pub fn from_matrix(p: &Matrix) -> Result<Self> {
        let m = p.require_square("permutation matrix")?;
        let mut targets = Vec::with_capacity(m);
        for i in 0..m {
            let mut hit = None;
            for j in 0..m {
                let z = p[(i, j)];
                if z.re == 1.0 && z.im == 0.0 {
                    if hit.is_some() {
                        return Err(Error::NotPermutation(format!("row {i} has more than one 1")));
                    }
                    hit = Some(j);
                } else if z.re != 0.0 || z.im != 0.0 {
                    return Err(Error::NotPermutation(format!("entry ({i}, {j}) is neither 0 nor 1")));
                }
            }
            targets.push(hit.ok_or_else(|| Error::NotPermutation(format!("row {i} has no 1")))?);
        }
        Self::from_indices(targets)
    }

    /// Cyclic shift with ones on the superdiagonal and in the bottom-left corner.
    pub fn primary(m: usize) -> Self {
        Self {
            targets: (0..m).map(|i| (i + 1) % m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.targets
    }

    pub fn to_matrix(&self) -> Matrix {
        let m = self.len();
        let mut p = Matrix::zeros(m, m);
        for (i, &j) in self.targets.iter().enumerate() {
            p[(i, j)] = crate::linalg::ONE;
        }
        p
    }

    fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.targets.iter().enumerate() {
            inv[j] = i;
        }
        inv
    }

    /// Multiplicative order: the lcm of the cycle lengths.
    pub fn order(&self) -> usize {
        let mut visited = vec![false; self.len()];
        let mut order = 1;
        for start in 0..self.len() {
            if visited[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !visited[i] {
                visited[i] = true;
                i = self.targets[i];
                len += 1;
            }
            order = lcm(order, len);
        }
        order
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Optional parameters for [`PeriodicOperator::builtin`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BuiltinParams {
    /// Declared period; must be a positive multiple of the natural period.
    pub period: Option<usize>,
    /// Permutation for `perm_similarity`.
    pub permutation: Option<Permutation>,
}

/// Names accepted by [`PeriodicOperator::builtin`].
pub const BUILTIN_NAMES: [&str; 6] = [
    "identity",
    "transpose",
    "hermitian",
    "conjugate",
    "anti_transpose",
    "perm_similarity",
];

type MapFn = dyn Fn(&Matrix) -> Matrix + Send + Sync;

/// A matrix operator with a declared period and multiplicativity kind.
#[derive(Clone)]
pub struct PeriodicOperator {
    name: String,
    period: usize,
    kind: OrderKind,
    dimension: Option<usize>,
    map: Arc<MapFn>,
}

impl fmt::Debug for PeriodicOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicOperator")
            .field("name", &self.name)
            .field("period", &self.period)
            .field("kind", &self.kind)
            .field("dimension", &self.dimension)
            .finish()
    }
}

impl PeriodicOperator {
    /// User-defined operator. `map` must preserve the shape of square
    /// matrices; nothing about the axioms is verified here, run
    /// [`check_operator`] before trusting it.
    pub fn custom(
        name: impl Into<String>,
        period: usize,
        kind: OrderKind,
        dimension: Option<usize>,
        map: impl Fn(&Matrix) -> Matrix + Send + Sync + 'static,
    ) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidParameter("operator period must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            period,
            kind,
            dimension,
            map: Arc::new(map),
        })
    }

    /// `outer ∘ inner` with an explicitly declared period.
    pub fn composed(
        name: impl Into<String>,
        outer: &PeriodicOperator,
        inner: &PeriodicOperator,
        period: usize,
    ) -> Result<Self> {
        let dimension = match (outer.dimension, inner.dimension) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::DimensionMismatch {
                    context: "PeriodicOperator::composed",
                    expected: format!("{a}"),
                    found: format!("{b}"),
                })
            }
            (a, b) => a.or(b),
        };
        let (o, i) = (outer.map.clone(), inner.map.clone());
        Self::custom(name, period, outer.kind.compose(inner.kind), dimension, move |x| o(&i(x)))
    }

    pub fn identity(period: usize) -> Self {
        Self::custom("identity", period.max(1), OrderKind::Preserving, None, Matrix::clone)
            .expect("positive period")
    }

    pub fn transpose() -> Self {
        Self::custom("transpose", 2, OrderKind::Reversing, None, Matrix::transpose).expect("positive period")
    }

    pub fn hermitian() -> Self {
        Self::custom("hermitian", 2, OrderKind::Reversing, None, Matrix::adjoint).expect("positive period")
    }

    pub fn conjugate() -> Self {
        Self::custom("conjugate", 2, OrderKind::Preserving, None, Matrix::conj).expect("positive period")
    }

    /// Reflection across the anti-diagonal: `f(X)[i, j] = X[m-1-j, m-1-i]`.
    pub fn anti_transpose() -> Self {
        Self::custom("anti_transpose", 2, OrderKind::Reversing, None, anti_transpose_map)
            .expect("positive period")
    }

    /// `f(X) = Pᵀ X P`, period equal to the order of `P`.
    pub fn perm_similarity(p: &Permutation) -> Self {
        let inv = p.inverse();
        let m = p.len();
        Self::custom("perm_similarity", p.order(), OrderKind::Preserving, Some(m), move |x| {
            Matrix::from_fn(m, m, |a, b| x[(inv[a], inv[b])])
        })
        .expect("positive period")
    }

    /// Looks up a builtin by name.
    pub fn builtin(name: &str, params: &BuiltinParams) -> Result<Self> {
        let mut op = match name {
            "identity" => Self::identity(1),
            "transpose" => Self::transpose(),
            "hermitian" => Self::hermitian(),
            "conjugate" => Self::conjugate(),
            "anti_transpose" => Self::anti_transpose(),
            "perm_similarity" => {
                let p = params.permutation.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("perm_similarity requires a permutation".into())
                })?;
                Self::perm_similarity(p)
            }
            other => return Err(Error::UnknownOperator(other.to_string())),
        };
        if name != "perm_similarity" && params.permutation.is_some() {
            return Err(Error::InvalidParameter(format!("operator `{name}` takes no permutation")));
        }
        if let Some(declared) = params.period {
            if declared == 0 || declared % op.period != 0 {
                return Err(Error::InvalidParameter(format!(
                    "declared period {declared} is not a positive multiple of the period {} of `{name}`",
                    op.period
                )));
            }
            op.period = declared;
        }
        Ok(op)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    /// Fixed matrix dimension, for operators that only act on one size.
    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    /// Same operator with a different declared period.
    pub fn with_period(&self, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidParameter("operator period must be positive".into()));
        }
        let mut op = self.clone();
        op.period = period;
        Ok(op)
    }

    /// Same map, re-declared with another kind. Only useful for negative controls.
    pub fn with_kind(&self, kind: OrderKind) -> Self {
        let mut op = self.clone();
        op.kind = kind;
        op
    }

    pub(crate) fn check_dimension(&self, x: &Matrix) -> Result<usize> {
        let m = x.require_square("operator input")?;
        match self.dimension {
            Some(d) if d != m => Err(Error::DimensionMismatch {
                context: "operator apply",
                expected: format!("{d}x{d} for `{}`", self.name),
                found: format!("{m}x{m}"),
            }),
            _ => Ok(m),
        }
    }

    /// `f(X)`.
    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        self.check_dimension(x)?;
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &Matrix) -> Matrix {
        (self.map)(x)
    }

    /// `f^(i)(X)`; `i = 0` returns `X`.
    pub fn power_apply(&self, i: usize, x: &Matrix) -> Result<Matrix> {
        self.check_dimension(x)?;
        Ok(self.power_unchecked(i, x))
    }

    pub(crate) fn power_unchecked(&self, i: usize, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for _ in 0..i {
            out = self.apply_unchecked(&out);
        }
        out
    }

    /// `[f^(0)(X), f^(1)(X), ..., f^(count-1)(X)]`.
    pub(crate) fn orbit(&self, x: &Matrix, count: usize) -> Vec<Matrix> {
        let mut out = Vec::with_capacity(count);
        let mut cur = x.clone();
        for _ in 0..count {
            let next = self.apply_unchecked(&cur);
            out.push(cur);
            cur = next;
        }
        out
    }
}

fn anti_transpose_map(x: &Matrix) -> Matrix {
    let m = x.rows();
    Matrix::from_fn(m, m, |i, j| x[(m - 1 - j, m - 1 - i)])
}

/// Outcome of [`check_operator`]. Errors are relative: `‖lhs − rhs‖_F / (1 + ‖lhs‖_F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorCheckReport {
    pub dimension: usize,
    pub additivity_max_err: f64,
    pub multiplicativity_max_err: f64,
    pub periodicity_max_err: f64,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
    pub passed: bool,
}

fn rel_err(lhs: &Matrix, rhs: &Matrix) -> f64 {
    if lhs.shape() != rhs.shape() {
        return f64::INFINITY;
    }
    (lhs - rhs).frob_norm() / (1.0 + lhs.frob_norm())
}

/// Measures the worst violation of additivity, multiplicativity (in the
/// declared order) and periodicity over `trials` random pairs of `m×m`
/// complex matrices. Operators with a fixed dimension are checked at that
/// dimension regardless of `m`.
pub fn check_operator(op: &PeriodicOperator, m: usize, trials: usize, seed: u64, tol: f64) -> OperatorCheckReport {
    let m = op.dimension.unwrap_or(m).max(1);
    let mut rng = random::stream(seed, 0x6f70);
    let (mut add, mut mul, mut per) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..trials.max(1) {
        let x = random::complex_matrix(&mut rng, m, m);
        let y = random::complex_matrix(&mut rng, m, m);
        let fx = op.apply_unchecked(&x);
        let fy = op.apply_unchecked(&y);

        let f_sum = op.apply_unchecked(&(&x + &y));
        add = add.max(rel_err(&f_sum, &(&fx + &fy)));

        let f_prod = op.apply_unchecked(&(&x * &y));
        let expected = match op.kind {
            OrderKind::Preserving => &fx * &fy,
            OrderKind::Reversing => &fy * &fx,
        };
        mul = mul.max(rel_err(&f_prod, &expected));

        per = per.max(rel_err(&op.power_unchecked(op.period, &x), &x));
    }
    OperatorCheckReport {
        dimension: m,
        additivity_max_err: add,
        multiplicativity_max_err: mul,
        periodicity_max_err: per,
        trials: trials.max(1),
        seed,
        tol,
        passed: add <= tol && mul <= tol && per <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;

    fn m2(a: [[f64; 2]; 2]) -> Matrix {
        Matrix::from_real(&[&a[0], &a[1]]).unwrap()
    }

    #[test]
    fn apply_examples() {
        let x = m2([[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(PeriodicOperator::transpose().apply(&x).unwrap(), m2([[1.0, 3.0], [2.0, 4.0]]));
        // [[a, b], [c, d]] -> [[d, b], [c, a]]
        assert_eq!(PeriodicOperator::anti_transpose().apply(&x).unwrap(), m2([[4.0, 2.0], [3.0, 1.0]]));

        let i = Matrix::scalar(C64::new(0.0, 1.0));
        let minus_i = Matrix::scalar(C64::new(0.0, -1.0));
        assert_eq!(PeriodicOperator::conjugate().apply(&i).unwrap(), minus_i);
        let herm = PeriodicOperator::builtin("hermitian", &BuiltinParams::default()).unwrap();
        assert_eq!(herm.apply(&i).unwrap(), minus_i);
    }

    #[test]
    fn powers() {
        let x = m2([[1.0, 2.0], [3.0, 4.0]]);
        let t = PeriodicOperator::transpose();
        assert_eq!(t.power_apply(2, &x).unwrap(), x);
        assert_eq!(t.power_apply(0, &x).unwrap(), x);

        let p = PeriodicOperator::perm_similarity(&Permutation::primary(3));
        assert_eq!(p.period(), 3);
        let y = Matrix::from_real(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]).unwrap();
        assert_eq!(p.power_apply(3, &y).unwrap(), y);
        assert_ne!(p.power_apply(1, &y).unwrap(), y);
    }

    #[test]
    fn perm_similarity_matches_matrix_product() {
        let perm = Permutation::from_indices(vec![2, 0, 3, 1]).unwrap();
        let p = perm.to_matrix();
        let mut rng = random::rng(3);
        let x = random::complex_matrix(&mut rng, 4, 4);
        let expected = &(&p.transpose() * &x) * &p;
        assert_eq!(PeriodicOperator::perm_similarity(&perm).apply(&x).unwrap(), expected);
        assert_eq!(Permutation::from_matrix(&p).unwrap(), perm);
    }

    #[test]
    fn builtin_lookup() {
        let p4 = Permutation::primary(4);
        let op = PeriodicOperator::builtin(
            "perm_similarity",
            &BuiltinParams {
                permutation: Some(p4),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(op.kind(), OrderKind::Preserving);
        assert_eq!(op.period(), 4);
        assert_eq!(op.dimension(), Some(4));

        let id2 = PeriodicOperator::builtin(
            "identity",
            &BuiltinParams {
                period: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(id2.period(), 2);
        assert_eq!(id2.kind(), OrderKind::Preserving);

        assert!(matches!(
            PeriodicOperator::builtin("rotate", &BuiltinParams::default()),
            Err(Error::UnknownOperator(_))
        ));
        let bad_period = BuiltinParams {
            period: Some(3),
            ..Default::default()
        };
        assert!(PeriodicOperator::builtin("transpose", &bad_period).is_err());
        assert!(PeriodicOperator::builtin("perm_similarity", &BuiltinParams::default()).is_err());
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::from_indices(vec![0, 0]).is_err());
        assert!(Permutation::from_indices(vec![0, 2]).is_err());
        let not_perm = m2([[1.0, 1.0], [0.0, 0.0]]);
        assert!(Permutation::from_matrix(&not_perm).is_err());
        let scaled = m2([[0.0, 2.0], [1.0, 0.0]]);
        assert!(Permutation::from_matrix(&scaled).is_err());
        assert_eq!(Permutation::from_indices(vec![1, 0, 3, 4, 2]).unwrap().order(), 6);
        assert_eq!(Permutation::primary(5).order(), 5);
    }

    #[test]
    fn check_operator_examples() {
        let r = check_operator(&PeriodicOperator::transpose(), 4, 100, 1, 1e-12);
        assert!(r.passed, "{r:?}");
        let r = check_operator(&PeriodicOperator::anti_transpose(), 4, 100, 1, 1e-12);
        assert!(r.passed, "{r:?}");

        let wrong = PeriodicOperator::transpose().with_kind(OrderKind::Preserving);
        let r = check_operator(&wrong, 4, 100, 1, 1e-12);
        assert!(!r.passed);
        assert!(r.multiplicativity_max_err > 1e-3);
        assert!(r.additivity_max_err <= 1e-12 && r.periodicity_max_err <= 1e-12);
    }

    #[test]
    fn check_operator_is_deterministic() {
        let op = PeriodicOperator::conjugate().with_period(3).unwrap();
        let a = check_operator(&op, 3, 10, 42, 1e-12);
        let b = check_operator(&op, 3, 10, 42, 1e-12);
        assert_eq!(a, b);
        assert!(!a.passed && a.periodicity_max_err > 1e-3);
    }

    #[test]
    fn dimension_is_enforced() {
        let p = PeriodicOperator::perm_similarity(&Permutation::primary(3));
        assert!(p.apply(&Matrix::identity(2)).is_err());
        assert!(PeriodicOperator::transpose().apply(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn composed_transpose_perm_has_period_four() {
        let p = PeriodicOperator::perm_similarity(&Permutation::primary(4));
        let f = PeriodicOperator::composed("transpose_perm", &PeriodicOperator::transpose(), &p, 4).unwrap();
        assert_eq!(f.kind(), OrderKind::Reversing);
        let r = check_operator(&f, 4, 50, 9, 1e-12);
        assert!(r.passed, "{r:?}");
        // period 2 would be wrong
        let r = check_operator(&f.with_period(2).unwrap(), 4, 5, 9, 1e-12);
        assert!(!r.passed);
    }
}
