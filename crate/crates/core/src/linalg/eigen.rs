//! Eigenvalues of dense complex matrices.
//!
//! Householder reduction to upper Hessenberg form followed by single-shift
//! complex QR sweeps (Wilkinson shifts, exceptional shifts on stagnation).
//! Only eigenvalues are produced; the unitary factors are never accumulated.

use super::matrix::{Matrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Multiset of eigenvalues of a square matrix, with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<C64>);

impl Spectrum {
    pub fn new(values: Vec<C64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    /// Largest modulus, i.e. the spectral radius.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Number of values within `tol` of `z`.
    pub fn count_near(&self, z: C64, tol: f64) -> usize {
        self.0.iter().filter(|&&w| (w - z).norm() <= tol).count()
    }

    /// Pairs the two multisets by repeatedly taking the globally closest
    /// remaining pair and returns the largest matched distance. Returns
    /// `f64::INFINITY` when the cardinalities differ.
    pub fn matching_distance(&self, other: &Spectrum) -> f64 {
        match self.greedy_matching(other) {
            Some(dists) => dists.into_iter().fold(0.0, f64::max),
            None => f64::INFINITY,
        }
    }

    /// Sum of matched distances under the same greedy pairing.
    pub fn matching_total(&self, other: &Spectrum) -> f64 {
        match self.greedy_matching(other) {
            Some(dists) => dists.into_iter().sum(),
            None => f64::INFINITY,
        }
    }

    fn greedy_matching(&self, other: &Spectrum) -> Option<Vec<f64>> {
        if self.len() != other.len() {
            return None;
        }
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(self.len() * other.len());
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                pairs.push(((a - b).norm(), i, j));
            }
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut used_a = vec![false; self.len()];
        let mut used_b = vec![false; other.len()];
        let mut out = Vec::with_capacity(self.len());
        for (d, i, j) in pairs {
            if !used_a[i] && !used_b[j] {
                used_a[i] = true;
                used_b[j] = true;
                out.push(d);
            }
        }
        Some(out)
    }
}

/// All eigenvalues of a square matrix, with multiplicity.
pub fn eigenvalues(a: &Matrix) -> Result<Spectrum> {
    let n = a.require_square("eigenvalues")?;
    if !a.is_finite() {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    let mut h = hessenberg(a);
    let mut eigs = vec![ZERO; n];
    let scale = a.frob_norm();
    let mut hi = n - 1;
    let mut sweeps = 0usize;
    loop {
        if hi == 0 {
            eigs[0] = h[(0, 0)];
            break;
        }
        let lo = active_window_start(&mut h, hi, scale);
        if lo == hi {
            eigs[hi] = h[(hi, hi)];
            hi -= 1;
            sweeps = 0;
            continue;
        }
        if lo + 1 == hi {
            let (l1, l2) = eig2x2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs[lo] = l1;
            eigs[hi] = l2;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::EigenFailure {
                iterations: sweeps - 1,
                lo,
                hi,
            });
        }
        let shift = if sweeps.is_multiple_of(11) {
            // exceptional shift to break cycles
            // (window has at least three rows here, so hi >= 2)
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.4 * h[(hi - 1, hi - 2)].norm())
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(Spectrum(eigs))
}

/// `max |λ|` over the eigenvalues.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    Ok(eigenvalues(a)?.max_abs())
}

/// Finds the start of the unreduced block ending at `hi`, zeroing the
/// negligible subdiagonal entry that separates it.
fn active_window_start(h: &mut Matrix, hi: usize, scale: f64) -> usize {
    let eps = f64::EPSILON;
    let mut l = hi;
    while l > 0 {
        let sub = h[(l, l - 1)].norm();
        let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
        if s == 0.0 {
            s = scale;
        }
        if sub <= eps * s || sub <= f64::MIN_POSITIVE {
            h[(l, l - 1)] = ZERO;
            return l;
        }
        l -= 1;
    }
    0
}

fn hessenberg(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..n - 2 {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;
        // left: H <- (I - beta v v^H) H on rows k+1..n
        for c in k..n {
            let dot: C64 = v.iter().enumerate().map(|(t, vt)| vt.conj() * h[(k + 1 + t, c)]).sum();
            let f = dot * beta;
            for (t, vt) in v.iter().enumerate() {
                h[(k + 1 + t, c)] -= vt * f;
            }
        }
        // right: H <- H (I - beta v v^H) on columns k+1..n
        for r in 0..n {
            let dot: C64 = v.iter().enumerate().map(|(t, vt)| h[(r, k + 1 + t)] * vt).sum();
            let f = dot * beta;
            for (t, vt) in v.iter().enumerate() {
                h[(r, k + 1 + t)] -= f * vt.conj();
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// One explicitly shifted QR step `H - μI = QR, H <- RQ + μI` on the
/// window `lo..=hi`, using Givens rotations.
fn qr_sweep(h: &mut Matrix, lo: usize, hi: usize, shift: C64) {
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for col in k..=hi {
            let x = h[(k, col)];
            let y = h[(k + 1, col)];
            h[(k, col)] = x * c + s * y;
            h[(k + 1, col)] = -s.conj() * x + y * c;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        let last_row = (k + 2).min(hi);
        for row in lo..=last_row {
            let x = h[(row, k)];
            let y = h[(row, k + 1)];
            h[(row, k)] = x * c + y * s.conj();
            h[(row, k + 1)] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` with real `c` mapping `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn eig2x2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let half_tr = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    // pick the root without cancellation, recover the other from the determinant
    let big = if (half_tr + root).norm() >= (half_tr - root).norm() {
        half_tr + root
    } else {
        half_tr - root
    };
    if big.norm() == 0.0 {
        return (ZERO, ZERO);
    }
    (big, det / big)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let (l1, l2) = eig2x2(a, b, c, d);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn sorted_by_re(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_and_nilpotent() {
        let d = Matrix::diag(&[real(2.0), real(-3.0)]);
        let got = sorted_by_re(eigenvalues(&d).unwrap().into_vec());
        assert_eq!(got, vec![real(-3.0), real(2.0)]);

        let n = Matrix::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let got = eigenvalues(&n).unwrap();
        assert!(got.values().iter().all(|z| z.norm() < 1e-15));
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let r = Matrix::from_real(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let got = eigenvalues(&r).unwrap();
        let expected = Spectrum::new(vec![C64::new(0.0, 1.0), C64::new(0.0, -1.0)]);
        assert!(got.matching_distance(&expected) < 1e-14);
    }

    #[test]
    fn spectral_radius_examples() {
        assert_eq!(spectral_radius(&Matrix::diag(&[real(2.0), real(-3.0)])).unwrap(), 3.0);
        assert!((spectral_radius(&Matrix::identity(3).scale_real(0.5)).unwrap() - 0.5).abs() < 1e-15);
        let m = Matrix::from_real(&[&[0.0, 4.0], &[1.0, 0.0]]).unwrap();
        assert!((spectral_radius(&m).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn companion_matrix_roots() {
        // roots 1, 2, 3, 4 of (x-1)(x-2)(x-3)(x-4) = x^4 - 10x^3 + 35x^2 - 50x + 24
        let c = Matrix::from_real(&[
            &[10.0, -35.0, 50.0, -24.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
        .unwrap();
        let got = eigenvalues(&c).unwrap();
        let expected = Spectrum::new((1..=4).map(|k| real(k as f64)).collect());
        assert!(got.matching_distance(&expected) < 1e-10);
    }

    #[test]
    fn trace_is_preserved() {
        let m = Matrix::from_rows(&[
            vec![C64::new(1.0, 2.0), C64::new(0.5, -1.0), C64::new(3.0, 0.0), C64::new(0.0, 1.0)],
            vec![C64::new(-2.0, 0.3), C64::new(0.0, 0.0), C64::new(1.0, 1.0), C64::new(2.0, -2.0)],
            vec![C64::new(0.7, 0.0), C64::new(-1.0, 4.0), C64::new(2.0, 0.0), C64::new(1.0, 0.0)],
            vec![C64::new(0.0, -3.0), C64::new(1.0, 0.0), C64::new(-0.5, 0.5), C64::new(1.5, 1.0)],
        ])
        .unwrap();
        let got = eigenvalues(&m).unwrap();
        let sum: C64 = got.values().iter().sum();
        assert!((sum - m.trace()).norm() < 1e-12);
    }

    #[test]
    fn non_square_is_rejected() {
        assert!(matches!(eigenvalues(&Matrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn matching_handles_cardinality_mismatch() {
        let a = Spectrum::new(vec![real(1.0)]);
        let b = Spectrum::new(vec![real(1.0), real(2.0)]);
        assert_eq!(a.matching_distance(&b), f64::INFINITY);
        assert_eq!(b.count_near(real(1.0 + 1e-12), 1e-9), 1);
    }
}
