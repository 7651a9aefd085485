//! Dense symmetric positive-definite matrices and the factorizations the
//! estimators need: Cholesky log-determinants, a cyclic Jacobi eigensolver,
//! and principal-submatrix extraction.

use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// Maximum number of cyclic Jacobi sweeps.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Row-major dense square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from rows; fails with `NotSquare` on ragged or non-square input.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    row: i,
                    cols: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    /// Wraps row-major data of length `n * n`.
    pub fn from_row_major(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::NotSquare {
                rows: n,
                row: data.len() / n.max(1),
                cols: data.len() % n.max(1),
            });
        }
        Ok(Self { n, data })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self[(i, l)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    /// Frobenius norm of the off-diagonal part.
    pub fn off_diagonal_norm(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    acc = acc + self[(i, j)] * self[(i, j)];
                }
            }
        }
        acc.sqrt()
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// `(A + Aᵀ) / 2`, with exactly mirrored off-diagonal entries.
    pub fn symmetrized(&self) -> Self {
        let half = lit::<T>(0.5);
        let mut s = self.clone();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = (self[(i, j)] + self[(j, i)]) * half;
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self[(i, j)] == T::zero()))
    }

    /// `P A Pᵀ` where `P` maps row `i` to row `perm[i]`-th source, i.e. `out[i][j] = a[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out[(i, j)] = self[(perm[i], perm[j])];
            }
        }
        out
    }

    /// `Qᵀ A Q`.
    pub fn conjugate_by(&self, q: &Self) -> Self {
        q.transpose().matmul(&self.matmul(q))
    }

    fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|x| !x.is_finite())
            .map(|p| (p / self.n, p % self.n))
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues of a positive-definite matrix with derived quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum<T> {
    /// Sorted descending, all strictly positive.
    pub eigenvalues: Vec<T>,
    /// `λ_1 / λ_n`.
    pub condition_number: T,
    /// `min(|log λ_1|, |log λ_n|)`.
    pub ell: T,
}

impl<T: Scalar> Spectrum<T> {
    /// Sorts `eigenvalues` descending and derives κ and ℓ; all values must be positive.
    pub fn from_eigenvalues(mut eigenvalues: Vec<T>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::DimensionTooSmall { n: 0, min: 1 });
        }
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        let max = eigenvalues[0];
        let min = *eigenvalues.last().unwrap();
        if !(min > T::zero()) {
            return Err(Error::NotPositiveDefinite {
                min: to_f64(min),
                max: to_f64(max),
            });
        }
        let condition_number = max / min;
        let ell = max.ln().abs().min(min.ln().abs());
        Ok(Self {
            eigenvalues,
            condition_number,
            ell,
        })
    }

    pub fn largest(&self) -> T {
        self.eigenvalues[0]
    }

    pub fn smallest(&self) -> T {
        *self.eigenvalues.last().unwrap()
    }

    /// True when `λ_n < 1 < λ_1`; the `k ℓ(M)` lower bound on `|E[Y]|` is not
    /// guaranteed in that case.
    pub fn straddles_one(&self) -> bool {
        self.smallest() < T::one() && self.largest() > T::one()
    }
}

/// Options for [`make_spd_with`].
#[derive(Clone, Copy, Debug)]
pub struct SpdOptions<T> {
    /// Relative definiteness threshold: require `λ_n > pd_tolerance · λ_1`.
    pub pd_tolerance: T,
    /// Reject input whose asymmetry exceeds `1e-10` relative to its largest entry.
    pub strict_symmetry: bool,
}

impl<T: Scalar> Default for SpdOptions<T> {
    fn default() -> Self {
        Self {
            pd_tolerance: T::pd_tolerance(),
            strict_symmetry: false,
        }
    }
}

/// Symmetric positive-definite matrix. Immutable; the spectrum is computed once.
#[derive(Clone, Debug)]
pub struct SpdMatrix<T> {
    entries: SquareMatrix<T>,
    is_diagonal: bool,
    spectrum: OnceLock<Spectrum<T>>,
}

impl<T: Scalar> SpdMatrix<T> {
    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.n
    }

    pub fn entries(&self) -> &SquareMatrix<T> {
        &self.entries
    }

    pub fn into_entries(self) -> SquareMatrix<T> {
        self.entries
    }

    /// True iff every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        self.is_diagonal
    }

    /// Cached spectrum, computed with the Jacobi solver on first use.
    pub fn spectrum(&self) -> Result<&Spectrum<T>> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = compute_spectrum(&self.entries, self.is_diagonal)?;
        let _ = self.spectrum.set(s);
        Ok(self.spectrum.get().expect("spectrum just set"))
    }

    pub fn condition_number(&self) -> Result<T> {
        Ok(self.spectrum()?.condition_number)
    }

    pub fn ell(&self) -> Result<T> {
        Ok(self.spectrum()?.ell)
    }

    pub fn log_det(&self) -> Result<T> {
        log_det(self)
    }

    fn trusted(entries: SquareMatrix<T>) -> Self {
        let is_diagonal = entries.is_diagonal();
        Self {
            entries,
            is_diagonal,
            spectrum: OnceLock::new(),
        }
    }
}

impl<T: Scalar> PartialEq for SpdMatrix<T> {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

fn compute_spectrum<T: Scalar>(entries: &SquareMatrix<T>, diagonal: bool) -> Result<Spectrum<T>> {
    let values = if diagonal {
        entries.diagonal()
    } else {
        symmetric_eigenvalues(entries)?
    };
    Spectrum::from_eigenvalues(values)
}

/// Validates and symmetrizes `entries` with default options.
pub fn make_spd<T: Scalar>(entries: SquareMatrix<T>) -> Result<SpdMatrix<T>> {
    make_spd_with(entries, &SpdOptions::default())
}

pub fn make_spd_with<T: Scalar>(
    entries: SquareMatrix<T>,
    options: &SpdOptions<T>,
) -> Result<SpdMatrix<T>> {
    if entries.n == 0 {
        return Err(Error::DimensionTooSmall { n: 0, min: 1 });
    }
    if let Some((row, col)) = entries.first_non_finite() {
        return Err(Error::NotFinite { row, col });
    }
    if options.strict_symmetry {
        let scale = entries
            .as_slice()
            .iter()
            .fold(T::zero(), |m, x| m.max(x.abs()));
        let dev = entries.max_asymmetry();
        if dev > lit::<T>(1e-10) * scale {
            return Err(Error::Asymmetric {
                deviation: to_f64(dev),
            });
        }
    }
    let sym = entries.symmetrized();
    let is_diagonal = sym.is_diagonal();
    // Non-positive eigenvalues surface here as NotPositiveDefinite.
    let spectrum = compute_spectrum(&sym, is_diagonal)?;
    let (min, max) = (spectrum.smallest(), spectrum.largest());
    if !(min > options.pd_tolerance * max) {
        return Err(Error::NotPositiveDefinite {
            min: to_f64(min),
            max: to_f64(max),
        });
    }
    let cell = OnceLock::new();
    let _ = cell.set(spectrum);
    Ok(SpdMatrix {
        entries: sym,
        is_diagonal,
        spectrum: cell,
    })
}

/// Strictly increasing list of row/column indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    /// Validates strict increase, non-emptiness and `max < n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidIndexSet("empty".into()));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndexSet(format!(
                "not strictly increasing at {} >= {}",
                w[0], w[1]
            )));
        }
        let last = *indices.last().unwrap();
        if last >= n {
            return Err(Error::IndexOutOfRange { index: last, n });
        }
        Ok(Self { indices })
    }

    /// Sorts and deduplicates-checks arbitrary input.
    pub fn from_unsorted(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        Self::new(indices, n)
    }

    pub fn all(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }
}

/// `M_I`, the principal submatrix on `idx`. Positive definite by interlacing.
pub fn principal_submatrix<T: Scalar>(m: &SpdMatrix<T>, idx: &IndexSet) -> Result<SpdMatrix<T>> {
    let n = m.dim();
    let ix = idx.as_slice();
    if let Some(&bad) = ix.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    let k = ix.len();
    let mut sub = SquareMatrix::zeros(k);
    for (a, &i) in ix.iter().enumerate() {
        for (b, &j) in ix.iter().enumerate() {
            sub[(a, b)] = m.entries[(i, j)];
        }
    }
    Ok(SpdMatrix::trusted(sub))
}

/// Natural-log determinant `2 Σ log L_ii` from the Cholesky factor.
pub fn log_det<T: Scalar>(m: &SpdMatrix<T>) -> Result<T> {
    let n = m.dim();
    let mut ws = LogDetWorkspace::new(n);
    ws.log_det_full(&m.entries)
}

/// Reusable Cholesky scratch space for repeated principal log-minors.
#[derive(Clone, Debug)]
pub struct LogDetWorkspace<T> {
    buf: Vec<T>,
}

impl<T: Scalar> LogDetWorkspace<T> {
    pub fn new(capacity: usize) -> Self {
        Self {
            buf: Vec::with_capacity(capacity * capacity),
        }
    }

    pub fn log_det_full(&mut self, a: &SquareMatrix<T>) -> Result<T> {
        let n = a.n;
        self.buf.clear();
        self.buf.extend_from_slice(&a.data);
        cholesky_log_det_in_place(&mut self.buf, n)
    }

    /// `log det M_I` without materializing an [`SpdMatrix`]. Indices are trusted.
    pub fn log_det_principal(&mut self, a: &SquareMatrix<T>, idx: &[usize]) -> Result<T> {
        let k = idx.len();
        self.buf.clear();
        for &i in idx {
            let row = a.row(i);
            self.buf.extend(idx.iter().map(|&j| row[j]));
        }
        cholesky_log_det_in_place(&mut self.buf, k)
    }
}

/// In-place lower Cholesky of a row-major `n x n` buffer; returns `log det`.
fn cholesky_log_det_in_place<T: Scalar>(a: &mut [T], n: usize) -> Result<T> {
    let mut log_det = T::zero();
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            let l = a[j * n + p];
            d = d - l * l;
        }
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::CholeskyBreakdown { pivot: j });
        }
        let ljj = d.sqrt();
        a[j * n + j] = ljj;
        log_det = log_det + ljj.ln();
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for p in 0..j {
                s = s - a[i * n + p] * a[j * n + p];
            }
            a[i * n + j] = s / ljj;
        }
    }
    Ok(log_det + log_det)
}

/// Cholesky factor `L` (lower triangular, `A = L Lᵀ`).
pub fn cholesky<T: Scalar>(a: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    let n = a.n;
    let mut buf = a.data.clone();
    cholesky_log_det_in_place(&mut buf, n)?;
    for i in 0..n {
        for j in (i + 1)..n {
            buf[i * n + j] = T::zero();
        }
    }
    Ok(SquareMatrix { n, data: buf })
}

/// Eigenvalues of an SPD matrix via [`symmetric_eigenvalues`], as a [`Spectrum`].
pub fn eigenvalues_sym<T: Scalar>(m: &SpdMatrix<T>) -> Result<Spectrum<T>> {
    Spectrum::from_eigenvalues(symmetric_eigenvalues(&m.entries)?)
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted descending.
///
/// Only the upper triangle's values matter in exact arithmetic; the input is
/// treated as symmetric. Converges when the off-diagonal Frobenius norm drops
/// below `T::jacobi_tolerance()` times the matrix Frobenius norm.
pub fn symmetric_eigenvalues<T: Scalar>(a: &SquareMatrix<T>) -> Result<Vec<T>> {
    let n = a.n;
    let mut m = a.symmetrized();
    let threshold = T::jacobi_tolerance() * m.frobenius_norm();
    let mut sweeps = 0;
    while m.off_diagonal_norm() > threshold {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut m, p, q);
            }
        }
        sweeps += 1;
    }
    let mut values = m.diagonal();
    values.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    Ok(values)
}

fn jacobi_rotate<T: Scalar>(m: &mut SquareMatrix<T>, p: usize, q: usize) {
    let apq = m[(p, q)];
    if apq == T::zero() {
        return;
    }
    let n = m.n;
    let two = lit::<T>(2.0);
    let tau = (m[(q, q)] - m[(p, p)]) / (two * apq);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = m[(r, p)];
        let arq = m[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        m[(r, p)] = new_rp;
        m[(p, r)] = new_rp;
        m[(r, q)] = new_rq;
        m[(q, r)] = new_rq;
    }
    m[(p, p)] = m[(p, p)] - t * apq;
    m[(q, q)] = m[(q, q)] + t * apq;
    m[(p, q)] = T::zero();
    m[(q, p)] = T::zero();
}

/// Householder QR. Returns `(Q, diag(R))` with `A = Q R`.
pub fn householder_qr<T: Scalar>(a: &SquareMatrix<T>) -> (SquareMatrix<T>, Vec<T>) {
    let n = a.n;
    let mut r = a.clone();
    let mut reflectors: Vec<Option<Vec<T>>> = Vec::with_capacity(n);
    for j in 0..n.saturating_sub(1) {
        let norm = (j..n)
            .fold(T::zero(), |acc, i| acc + r[(i, j)] * r[(i, j)])
            .sqrt();
        if norm == T::zero() {
            reflectors.push(None);
            continue;
        }
        let x0 = r[(j, j)];
        let alpha = if x0 >= T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (j..n).map(|i| r[(i, j)]).collect();
        v[0] = v[0] - alpha;
        let vnorm = v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
        if vnorm == T::zero() {
            reflectors.push(None);
            continue;
        }
        for x in v.iter_mut() {
            *x = *x / vnorm;
        }
        apply_reflector_rows(&mut r, &v, j);
        reflectors.push(Some(v));
    }
    let diag = r.diagonal();
    let mut q = SquareMatrix::identity(n);
    for (j, v) in reflectors.iter().enumerate().rev() {
        if let Some(v) = v {
            apply_reflector_rows(&mut q, v, j);
        }
    }
    (q, diag)
}

/// `A[j.., :] -= 2 v (vᵀ A[j.., :])`.
fn apply_reflector_rows<T: Scalar>(a: &mut SquareMatrix<T>, v: &[T], j: usize) {
    let n = a.n;
    let two = lit::<T>(2.0);
    for col in 0..n {
        let dot = v
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (off, &vi)| acc + vi * a[(j + off, col)]);
        if dot == T::zero() {
            continue;
        }
        for (off, &vi) in v.iter().enumerate() {
            a[(j + off, col)] = a[(j + off, col)] - two * vi * dot;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn diag(d: &[f64]) -> SpdMatrix<f64> {
        make_spd(SquareMatrix::from_diagonal(d)).unwrap()
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let m = make_spd(SquareMatrix::<f64>::identity(2)).unwrap();
        let s = m.spectrum().unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0]);
        assert_eq!(s.condition_number, 1.0);
        assert_eq!(s.ell, 0.0);
    }

    #[test]
    fn diag_three_one() {
        let m = diag(&[3.0, 1.0]);
        let s = m.spectrum().unwrap();
        assert_eq!(s.condition_number, 3.0);
        assert_eq!(s.ell, 0.0);
        assert!(m.is_diagonal());
    }

    #[test]
    fn indefinite_rejected() {
        let a = SquareMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            make_spd(a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn ragged_and_non_finite_rejected() {
        assert!(matches!(
            SquareMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0]]),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            SquareMatrix::from_rows(vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]),
            Err(Error::NotSquare { .. })
        ));
        let a = SquareMatrix::from_rows(vec![vec![1.0, f64::NAN], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            make_spd(a),
            Err(Error::NotFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn nearly_singular_fails_relative_threshold() {
        let m = make_spd(SquareMatrix::from_diagonal(&[1.0, 1e-13]));
        assert!(matches!(m, Err(Error::NotPositiveDefinite { .. })));
        // Scale invariance: the same shape at a tiny scale is fine.
        assert!(make_spd(SquareMatrix::from_diagonal(&[1e-20, 1e-21])).is_ok());
    }

    #[test]
    fn asymmetric_input_is_symmetrized_or_rejected_when_strict() {
        let a = SquareMatrix::from_rows(vec![vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        let m = make_spd(a.clone()).unwrap();
        assert_eq!(m.entries()[(0, 1)], 0.5);
        assert_eq!(m.entries()[(1, 0)], 0.5);
        let strict = SpdOptions {
            strict_symmetry: true,
            ..SpdOptions::default()
        };
        assert!(matches!(
            make_spd_with(a, &strict),
            Err(Error::Asymmetric { .. })
        ));
    }

    #[test]
    fn principal_submatrix_selects_entries() {
        let m = diag(&[3.0, 2.0, 1.0]);
        let sub = principal_submatrix(&m, &IndexSet::new(vec![0, 2], 3).unwrap()).unwrap();
        assert_eq!(sub.entries(), &SquareMatrix::from_diagonal(&[3.0, 1.0]));
        let full = principal_submatrix(&m, &IndexSet::all(3)).unwrap();
        assert_eq!(full, m);
        let out = IndexSet::new(vec![0, 5], 6).unwrap();
        assert!(matches!(
            principal_submatrix(&m, &out),
            Err(Error::IndexOutOfRange { index: 5, n: 3 })
        ));
    }

    #[test]
    fn index_set_validation() {
        assert!(IndexSet::new(vec![], 3).is_err());
        assert!(IndexSet::new(vec![1, 1], 3).is_err());
        assert!(IndexSet::new(vec![2, 1], 3).is_err());
        assert!(IndexSet::new(vec![0, 3], 3).is_err());
        assert_eq!(
            IndexSet::from_unsorted(vec![2, 0], 3).unwrap().as_slice(),
            &[0, 2]
        );
    }

    #[test]
    fn log_det_diagonal_cases() {
        let id = make_spd(SquareMatrix::<f64>::identity(7)).unwrap();
        assert_eq!(log_det(&id).unwrap(), 0.0);
        let m = diag(&[3.0, 3.0, 1.0, 1.0]);
        assert_relative_eq!(log_det(&m).unwrap(), 2.0 * 3f64.ln(), max_relative = 1e-14);
    }

    #[test]
    fn cholesky_breakdown_reported() {
        let a = SquareMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let mut ws = LogDetWorkspace::new(2);
        assert!(matches!(
            ws.log_det_full(&a),
            Err(Error::CholeskyBreakdown { pivot: 1 })
        ));
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = SquareMatrix::from_rows(vec![
            vec![4.0, 2.0, 0.4],
            vec![2.0, 3.0, 0.5],
            vec![0.4, 0.5, 2.0],
        ])
        .unwrap();
        let l = cholesky(&a).unwrap();
        let back = l.matmul(&l.transpose());
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(back[(i, j)], a[(i, j)], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn jacobi_on_two_by_two_rotation() {
        let th: f64 = 0.3;
        let q = SquareMatrix::from_rows(vec![vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]])
            .unwrap();
        let a = SquareMatrix::from_diagonal(&[3.0, 1.0]).conjugate_by(&q);
        let ev = symmetric_eigenvalues(&a).unwrap();
        assert_relative_eq!(ev[0], 3.0, epsilon = 1e-10);
        assert_relative_eq!(ev[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn jacobi_handles_indefinite_symmetric() {
        let a = SquareMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let ev = symmetric_eigenvalues(&a).unwrap();
        assert_relative_eq!(ev[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn qr_reconstructs_and_is_orthogonal() {
        let a = SquareMatrix::from_rows(vec![
            vec![1.0, 2.0, 0.0],
            vec![-1.0, 0.5, 3.0],
            vec![2.0, -1.0, 1.0],
        ])
        .unwrap();
        let (q, _) = householder_qr(&a);
        let qtq = q.transpose().matmul(&q);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(qtq[(i, j)], e, epsilon = 1e-14);
            }
        }
        // R = Qᵀ A is upper triangular.
        let r = q.transpose().matmul(&a);
        for i in 0..3 {
            for j in 0..i {
                assert!(f64::abs(r[(i, j)]) < 1e-13);
            }
        }
    }

    #[test]
    fn f32_path_works() {
        let m = make_spd(SquareMatrix::<f32>::from_diagonal(&[3.0, 3.0, 1.0, 1.0])).unwrap();
        assert!((m.log_det().unwrap() - 2.0 * 3f32.ln()).abs() < 1e-5);
        assert_eq!(m.condition_number().unwrap(), 3.0);
    }
}
