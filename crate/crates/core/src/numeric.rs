//! Dense complex matrices and the rank-revealing machinery every other
//! module builds on.
//!
//! All range and kernel decisions go through one SVD threshold policy
//! ([`ToleranceContext::rank_rel_tol`] times the largest singular value), so
//! two modules asking the same question about the same matrix always get the
//! same answer.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use num_complex::Complex64;

/// Errors raised by the numeric layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("entry count {got} does not match {rows}x{cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        got: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian within tolerance (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid tolerance {name} = {value}: must lie in [0, 1)")]
    InvalidTolerance { name: &'static str, value: f64 },
    #[error("decomposition failed: {0}")]
    Backend(String),
}

pub type Result<T> = std::result::Result<T, NumericError>;

/// Tolerances shared by every rank, inclusion and positivity decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceContext {
    /// Singular values at or below `rank_rel_tol * sigma_max` count as zero.
    pub rank_rel_tol: f64,
    /// Eigenvalues down to `-psd_tol * scale` are accepted as nonnegative.
    pub psd_tol: f64,
    /// Allowed relative residual for factorizations and Hermitian symmetry.
    pub residual_tol: f64,
}

impl Default for ToleranceContext {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-10,
            psd_tol: 1e-10,
            residual_tol: 1e-8,
        }
    }
}

impl ToleranceContext {
    pub fn new(rank_rel_tol: f64, psd_tol: f64, residual_tol: f64) -> Result<Self> {
        let ctx = Self {
            rank_rel_tol,
            psd_tol,
            residual_tol,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    /// Same value for all three tolerances.
    pub fn uniform(tol: f64) -> Result<Self> {
        Self::new(tol, tol, tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("rank_rel_tol", self.rank_rel_tol),
            ("psd_tol", self.psd_tol),
            ("residual_tol", self.residual_tol),
        ] {
            if !(0.0..1.0).contains(&value) {
                return Err(NumericError::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }
}

/// A dense complex matrix with finite entries.
#[derive(Clone)]
pub struct ComplexMatrix {
    inner: Mat<Complex64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.get(i, j);
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl PartialEq for ComplexMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows() == other.rows()
            && self.cols() == other.cols()
            && (0..self.rows()).all(|i| (0..self.cols()).all(|j| self.get(i, j) == other.get(i, j)))
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let data: Vec<Vec<[f64; 2]>> = (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| {
                        let z = self.get(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        let mut st = serializer.serialize_struct("ComplexMatrix", 3)?;
        st.serialize_field("cols", &self.cols())?;
        st.serialize_field("data", &data)?;
        st.serialize_field("rows", &self.rows())?;
        st.end()
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(NumericError::ShapeMismatch {
                rows,
                cols,
                got: entries.len(),
            });
        }
        if let Some(pos) = entries
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(NumericError::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self {
            inner: Mat::from_fn(rows, cols, |i, j| entries[i * cols + j]),
        })
    }

    /// Real matrix from a slice of rows.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(NumericError::ShapeMismatch {
                    rows: rows.len(),
                    cols,
                    got: row.len(),
                });
            }
            entries.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::from_row_major(rows.len(), cols, entries)
    }

    pub(crate) fn from_fn(
        rows: usize,
        cols: usize,
        f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        Self {
            inner: Mat::from_fn(rows, cols, f),
        }
    }

    pub(crate) fn from_faer(inner: Mat<Complex64>) -> Self {
        Self { inner }
    }

    pub(crate) fn as_faer(&self) -> &Mat<Complex64> {
        &self.inner
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            Complex64::new(if i == j { diag[i] } else { 0.0 }, 0.0)
        })
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.inner[(i, j)] = value;
    }

    pub fn row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows()).map(|i| self.get(i, j)).collect()
    }

    pub fn ensure_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(NumericError::NotSquare {
                rows: self.rows(),
                cols: self.cols(),
            })
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols(), self.rows(), |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| self.get(i, j) * factor)
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| self.get(i, j) * factor)
    }

    /// `lambda * I - self` for square matrices.
    pub fn shifted(&self, lambda: Complex64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| {
            let d = if i == j {
                lambda
            } else {
                Complex64::new(0.0, 0.0)
            };
            d - self.get(i, j)
        })
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols() != rhs.rows() {
            return Err(NumericError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                rhs.rows(),
                rhs.cols()
            )));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        Self {
            inner: &self.inner * &rhs.inner,
        }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(
            v.len(),
            self.cols(),
            "vector length must equal column count"
        );
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Nonnegative integer power of a square matrix.
    pub fn pow(&self, n: u32) -> Result<Self> {
        let dim = self.ensure_square()?;
        let mut acc = Self::identity(dim);
        for _ in 0..n {
            acc = acc.mul_unchecked(self);
        }
        Ok(acc)
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows() != other.rows() {
            return Err(NumericError::DimensionMismatch(format!(
                "hstack needs equal row counts, got {} and {}",
                self.rows(),
                other.rows()
            )));
        }
        let c = self.cols();
        Ok(Self::from_fn(self.rows(), c + other.cols(), |i, j| {
            if j < c {
                self.get(i, j)
            } else {
                other.get(i, j - c)
            }
        }))
    }

    /// Orthogonal direct sum of square or rectangular blocks.
    pub fn block_diag(blocks: &[&Self]) -> Self {
        let rows: usize = blocks.iter().map(|b| b.rows()).sum();
        let cols: usize = blocks.iter().map(|b| b.cols()).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    out.set(r0 + i, c0 + j, b.get(i, j));
                }
            }
            r0 += b.rows();
            c0 += b.cols();
        }
        out
    }

    /// Kronecker (tensor) product.
    pub fn kron(&self, other: &Self) -> Self {
        let (p, q) = (other.rows(), other.cols());
        Self::from_fn(self.rows() * p, self.cols() * q, |i, j| {
            self.get(i / p, j / q) * other.get(i % p, j % q)
        })
    }

    /// Copy of the rectangular block starting at `(row, col)`.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(row + i, col + j))
    }

    pub fn set_block(&mut self, row: usize, col: usize, block: &Self) {
        for i in 0..block.rows() {
            for j in 0..block.cols() {
                self.set(row + i, col + j, block.get(i, j));
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        (0..self.rows())
            .all(|i| (0..self.cols()).all(|j| self.get(i, j) == Complex64::new(0.0, 0.0)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0_f64;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                acc = acc.hypot(self.get(i, j).norm());
            }
        }
        acc
    }

    /// Singular values in nonincreasing order.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        if self.rows() == 0 || self.cols() == 0 {
            return Ok(Vec::new());
        }
        self.inner
            .singular_values()
            .map_err(|e| NumericError::Backend(format!("{e:?}")))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        Ok(self.singular_values()?.first().copied().unwrap_or(0.0))
    }

    /// Eigenvalues of a square matrix (complex Schur based).
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        let n = self.ensure_square()?;
        if n == 0 {
            return Ok(Vec::new());
        }
        self.inner
            .eigenvalues()
            .map_err(|e| NumericError::Backend(format!("{e:?}")))
    }

    /// Largest absolute difference between entries.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows(), self.cols()), (other.rows(), other.cols()));
        let mut m = 0.0_f64;
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                m = m.max((self.get(i, j) - other.get(i, j)).norm());
            }
        }
        m
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(
            (self.rows(), self.cols()),
            (rhs.rows(), rhs.cols()),
            "shape mismatch in add"
        );
        ComplexMatrix::from_fn(self.rows(), self.cols(), |i, j| {
            self.get(i, j) + rhs.get(i, j)
        })
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(
            (self.rows(), self.cols()),
            (rhs.rows(), rhs.cols()),
            "shape mismatch in sub"
        );
        ComplexMatrix::from_fn(self.rows(), self.cols(), |i, j| {
            self.get(i, j) - rhs.get(i, j)
        })
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.cols(), rhs.rows(), "shape mismatch in mul");
        self.mul_unchecked(rhs)
    }
}

/// Conjugate transpose.
pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// Orthonormal basis of a subspace of `C^ambient_dim`, stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    pub basis: ComplexMatrix,
    pub rank: usize,
}

impl SubspaceBasis {
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: ComplexMatrix::zeros(ambient_dim, 0),
            rank: 0,
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: ComplexMatrix::identity(ambient_dim),
            rank: ambient_dim,
        }
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        self.basis.column(j)
    }

    pub fn columns(&self) -> Vec<Vec<Complex64>> {
        (0..self.rank).map(|j| self.column(j)).collect()
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> ComplexMatrix {
        if self.rank == 0 {
            return ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        }
        &self.basis * &self.basis.adjoint()
    }

    /// Part of `m`'s columns orthogonal to the subspace: `(I - QQ*) m`.
    pub fn residual_of(&self, m: &ComplexMatrix) -> ComplexMatrix {
        if self.rank == 0 {
            return m.clone();
        }
        let coeffs = &self.basis.adjoint() * m;
        m - &(&self.basis * &coeffs)
    }

    /// `max_j ||(I - QQ*) v_j||` over the columns of `other`, i.e. the sine
    /// of the largest principal angle when `other` is orthonormal.
    pub fn max_gap_to(&self, other: &SubspaceBasis) -> Result<f64> {
        if other.rank == 0 {
            return Ok(0.0);
        }
        self.residual_of(&other.basis).spectral_norm()
    }

    /// Deviation of `basis* basis` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        if self.rank == 0 {
            return 0.0;
        }
        let gram = &self.basis.adjoint() * &self.basis;
        gram.max_abs_diff(&ComplexMatrix::identity(self.rank))
    }
}

/// Two subspaces are equal when their numerical ranks agree and the
/// largest principal angle between them is at most `angle_tol` radians.
pub fn subspaces_equal(a: &SubspaceBasis, b: &SubspaceBasis, angle_tol: f64) -> Result<bool> {
    if a.ambient_dim != b.ambient_dim {
        return Err(NumericError::DimensionMismatch(format!(
            "subspaces live in C^{} and C^{}",
            a.ambient_dim, b.ambient_dim
        )));
    }
    if a.rank != b.rank {
        return Ok(false);
    }
    let sin_max = a.max_gap_to(b)?.max(b.max_gap_to(a)?).min(1.0);
    Ok(sin_max.asin() <= angle_tol)
}

/// Principal-angle threshold used for subspace equality.
pub const SUBSPACE_ANGLE_TOL: f64 = 1e-7;

/// A full SVD together with the rank decision made on it.
#[derive(Debug, Clone)]
pub struct RankRevealing {
    rows: usize,
    cols: usize,
    u: Mat<Complex64>,
    v: Mat<Complex64>,
    singular_values: Vec<f64>,
    rank: usize,
    threshold: f64,
}

impl RankRevealing {
    pub fn new(m: &ComplexMatrix, tol: &ToleranceContext) -> Result<Self> {
        Self::with_cutoff(m, |sigma_max| tol.rank_rel_tol * sigma_max)
    }

    /// Rank decision against `rank_rel_tol * scale` instead of the matrix's
    /// own largest singular value. Useful when `m` is a piece of a larger
    /// computation whose natural size is `scale`.
    pub fn with_scale(m: &ComplexMatrix, tol: &ToleranceContext, scale: f64) -> Result<Self> {
        Self::with_cutoff(m, |_| tol.rank_rel_tol * scale)
    }

    fn with_cutoff(m: &ComplexMatrix, cutoff: impl FnOnce(f64) -> f64) -> Result<Self> {
        let (rows, cols) = (m.rows(), m.cols());
        if rows == 0 || cols == 0 {
            return Ok(Self {
                rows,
                cols,
                u: Mat::identity(rows, rows),
                v: Mat::identity(cols, cols),
                singular_values: Vec::new(),
                rank: 0,
                threshold: 0.0,
            });
        }
        let svd = m
            .as_faer()
            .svd()
            .map_err(|e| NumericError::Backend(format!("{e:?}")))?;
        let s = svd.S().column_vector();
        let singular_values: Vec<f64> = (0..rows.min(cols)).map(|i| s[i].re).collect();
        let sigma_max = singular_values.first().copied().unwrap_or(0.0);
        let threshold = cutoff(sigma_max);
        let rank = if sigma_max == 0.0 {
            0
        } else {
            singular_values.iter().filter(|&&x| x > threshold).count()
        };
        Ok(Self {
            rows,
            cols,
            u: svd.U().to_owned(),
            v: svd.V().to_owned(),
            singular_values,
            rank,
            threshold,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn range_basis(&self) -> SubspaceBasis {
        SubspaceBasis {
            ambient_dim: self.rows,
            basis: ComplexMatrix::from_fn(self.rows, self.rank, |i, j| self.u[(i, j)]),
            rank: self.rank,
        }
    }

    pub fn kernel_basis(&self) -> SubspaceBasis {
        let k = self.cols - self.rank;
        SubspaceBasis {
            ambient_dim: self.cols,
            basis: ComplexMatrix::from_fn(self.cols, k, |i, j| self.v[(i, self.rank + j)]),
            rank: k,
        }
    }

    /// Orthonormal basis of the orthogonal complement of the range.
    pub fn cokernel_basis(&self) -> SubspaceBasis {
        let k = self.rows - self.rank;
        SubspaceBasis {
            ambient_dim: self.rows,
            basis: ComplexMatrix::from_fn(self.rows, k, |i, j| self.u[(i, self.rank + j)]),
            rank: k,
        }
    }

    /// Top left and right singular vectors.
    pub fn top_singular_pair(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let left = (0..self.rows).map(|i| self.u[(i, 0)]).collect();
        let right = (0..self.cols).map(|i| self.v[(i, 0)]).collect();
        (left, right)
    }

    /// `U Σ V*` with every singular value at or below `cutoff` dropped.
    pub fn truncated(&self, cutoff: f64) -> ComplexMatrix {
        let keep = self
            .singular_values
            .iter()
            .take_while(|&&s| s > cutoff)
            .count();
        self.reconstruct(keep, |s| s)
    }

    /// Moore-Penrose pseudoinverse with the same rank cutoff.
    pub fn pseudoinverse(&self) -> ComplexMatrix {
        self.reconstruct(self.rank, |s| 1.0 / s).adjoint()
    }

    /// `U_r f(Σ_r) V_r*` over the leading `r` singular triplets.
    fn reconstruct(&self, r: usize, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        if r == 0 {
            return ComplexMatrix::zeros(self.rows, self.cols);
        }
        let sv = &self.singular_values;
        let us = Mat::from_fn(self.rows, r, |i, k| self.u[(i, k)] * f(sv[k]));
        let vr = self.v.get(.., ..r);
        ComplexMatrix::from_faer(&us * vr.adjoint())
    }
}

/// Numerical rank from singular values alone, skipping singular vectors.
pub fn numerical_rank(m: &ComplexMatrix, tol: &ToleranceContext) -> Result<usize> {
    let sv = m.singular_values()?;
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return Ok(0);
    }
    Ok(sv
        .iter()
        .filter(|&&x| x > tol.rank_rel_tol * sigma_max)
        .count())
}

pub fn kernel_basis(m: &ComplexMatrix, tol: &ToleranceContext) -> Result<SubspaceBasis> {
    Ok(RankRevealing::new(m, tol)?.kernel_basis())
}

pub fn range_basis(m: &ComplexMatrix, tol: &ToleranceContext) -> Result<SubspaceBasis> {
    Ok(RankRevealing::new(m, tol)?.range_basis())
}

pub fn pseudoinverse(m: &ComplexMatrix, tol: &ToleranceContext) -> Result<ComplexMatrix> {
    Ok(RankRevealing::new(m, tol)?.pseudoinverse())
}

/// Minimal-norm solution of `B C = A` together with its residual.
#[derive(Debug, Clone)]
pub struct PinvSolution {
    pub factor: ComplexMatrix,
    /// `||B C - A||_2`
    pub residual: f64,
}

/// `C = pinv(B) A`. The residual is always reported; whether it is small is
/// exactly the question of whether `R(A)` lies in `R(B)`.
pub fn pinv_solve(
    b: &ComplexMatrix,
    a: &ComplexMatrix,
    tol: &ToleranceContext,
) -> Result<PinvSolution> {
    let rr = RankRevealing::new(b, tol)?;
    pinv_solve_with(&rr, b, a)
}

pub(crate) fn pinv_solve_with(
    rr: &RankRevealing,
    b: &ComplexMatrix,
    a: &ComplexMatrix,
) -> Result<PinvSolution> {
    if b.rows() != a.rows() {
        return Err(NumericError::DimensionMismatch(format!(
            "pinv_solve needs B and A with equal row counts, got {} and {}",
            b.rows(),
            a.rows()
        )));
    }
    let factor = &rr.pseudoinverse() * a;
    let residual = (&(b * &factor) - a).spectral_norm()?;
    Ok(PinvSolution { factor, residual })
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary of eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Spectral norm of the (symmetrized) matrix.
    pub fn abs_max(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }
}

/// `(M + M*)/2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        (m.get(i, j) + m.get(j, i).conj()) * 0.5
    })
}

/// Eigensolve of a nearly Hermitian matrix. The input is symmetrized first;
/// an asymmetry larger than `residual_tol * scale` is rejected, where
/// `scale` defaults to the spectral norm of the symmetrized matrix.
pub fn hermitian_eigen(
    m: &ComplexMatrix,
    tol: &ToleranceContext,
    scale: Option<f64>,
) -> Result<HermitianEigen> {
    let n = m.ensure_square()?;
    if n == 0 {
        return Ok(HermitianEigen {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let h = hermitian_part(m);
    let evd = h
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| NumericError::Backend(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let eigenvalues: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let eig = HermitianEigen {
        eigenvalues,
        eigenvectors: ComplexMatrix::from_faer(evd.U().to_owned()),
    };
    let scale = scale.unwrap_or_else(|| eig.abs_max());
    let asymmetry = (m - &m.adjoint()).frobenius_norm() * 0.5;
    if asymmetry > tol.residual_tol * scale {
        return Err(NumericError::NotHermitian { asymmetry });
    }
    Ok(eig)
}

/// Ascending eigenvalues only, with the same symmetry check as
/// [`hermitian_eigen`].
pub fn hermitian_eigenvalues(
    m: &ComplexMatrix,
    tol: &ToleranceContext,
    scale: Option<f64>,
) -> Result<Vec<f64>> {
    let n = m.ensure_square()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut values = hermitian_part(m)
        .as_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| NumericError::Backend(format!("{e:?}")))?;
    values.sort_by(f64::total_cmp);
    let scale = scale.unwrap_or_else(|| values.iter().fold(0.0_f64, |a, v| a.max(v.abs())));
    let asymmetry = (m - &m.adjoint()).frobenius_norm() * 0.5;
    if asymmetry > tol.residual_tol * scale {
        return Err(NumericError::NotHermitian { asymmetry });
    }
    Ok(values)
}

/// Outcome of a positive-semidefiniteness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsdCheck {
    pub psd: bool,
    pub min_eigenvalue: f64,
}

/// PSD test relative to the matrix's own norm.
pub fn is_psd(m: &ComplexMatrix, tol: &ToleranceContext) -> Result<PsdCheck> {
    is_psd_scaled(m, None, tol)
}

/// PSD test with an explicit reference scale, for matrices that are
/// differences of larger quantities and may be nearly zero.
pub fn is_psd_scaled(
    m: &ComplexMatrix,
    scale: Option<f64>,
    tol: &ToleranceContext,
) -> Result<PsdCheck> {
    let values = hermitian_eigenvalues(m, tol, scale)?;
    let abs_max = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let scale = scale.unwrap_or(abs_max);
    let min_eigenvalue = values.first().copied().unwrap_or(0.0);
    Ok(PsdCheck {
        psd: min_eigenvalue >= -tol.psd_tol * scale,
        min_eigenvalue,
    })
}

/// Square root of a PSD matrix via its eigendecomposition. Negative
/// eigenvalues no lower than `-psd_tol * ||M||` are clipped to zero.
pub fn psd_sqrt(m: &ComplexMatrix, tol: &ToleranceContext) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m, tol, None)?;
    let floor = -tol.psd_tol * eig.abs_max();
    if eig.min() < floor {
        return Err(NumericError::Precondition(format!(
            "square root of a matrix with eigenvalue {:.3e}",
            eig.min()
        )));
    }
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(spectral_function(&eig.eigenvectors, &roots))
}

/// `U diag(values) U*`.
pub(crate) fn spectral_function(u: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let scaled = ComplexMatrix::from_fn(u.rows(), u.cols(), |i, j| u.get(i, j) * values[j]);
    &scaled * &u.adjoint()
}

pub fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, z| acc.hypot(z.norm()))
}

pub fn normalized(v: &[Complex64]) -> Vec<Complex64> {
    let n = vector_norm(v);
    if n == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|z| z / n).collect()
}

pub fn inner_product(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn nilpotent2() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap()
    }

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| c(next(), next()))
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::from_row_major(2, 2, vec![c(1.0, 0.0); 3]),
            Err(NumericError::ShapeMismatch { .. })
        ));
        let mut entries = vec![c(1.0, 0.0); 4];
        entries[3] = c(f64::NAN, 0.0);
        assert_eq!(
            ComplexMatrix::from_row_major(2, 2, entries),
            Err(NumericError::NonFinite { row: 1, col: 1 })
        );
        assert!(ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let expected = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert_eq!(adjoint(&nilpotent2()), expected);
        let i = ComplexMatrix::from_row_major(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(adjoint(&i).get(0, 0), c(0.0, -1.0));
        let m = pseudo_random(4, 4, 3);
        let back = m.adjoint().adjoint();
        for (x, y) in m.row_major().iter().zip(back.row_major()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn rank_examples() {
        let tol = ToleranceContext::default();
        assert_eq!(
            numerical_rank(&ComplexMatrix::identity(3), &tol).unwrap(),
            3
        );
        assert_eq!(
            numerical_rank(&ComplexMatrix::zeros(3, 3), &tol).unwrap(),
            0
        );
        // exact singular values of diag(1, 1e-16) are 1 and 1e-16
        let d = ComplexMatrix::from_real_diagonal(&[1.0, 1e-16]);
        assert_eq!(numerical_rank(&d, &tol).unwrap(), 1);
    }

    #[test]
    fn kernel_and_range_examples() {
        let tol = ToleranceContext::default();
        let n = nilpotent2();
        let k = kernel_basis(&n, &tol).unwrap();
        assert_eq!(k.rank, 1);
        assert!((k.column(0)[0].norm() - 1.0).abs() < 1e-14);
        assert!(k.column(0)[1].norm() < 1e-14);
        let r = range_basis(&n, &tol).unwrap();
        assert_eq!(r.rank, 1);
        assert!((r.column(0)[0].norm() - 1.0).abs() < 1e-14);

        let inv = ComplexMatrix::from_real_rows(&[[2.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(kernel_basis(&inv, &tol).unwrap().rank, 0);

        let d = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 2.0]);
        let k = kernel_basis(&d, &tol).unwrap();
        assert_eq!(k.rank, 1);
        assert!((k.column(0)[1].norm() - 1.0).abs() < 1e-14);

        assert_eq!(
            range_basis(&ComplexMatrix::identity(4), &tol).unwrap().rank,
            4
        );

        let u = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)];
        let v = vec![c(0.5, 0.5), c(1.0, 0.0), c(0.0, -1.0)];
        let outer = ComplexMatrix::from_fn(3, 3, |i, j| u[i] * v[j].conj());
        let r = range_basis(&outer, &tol).unwrap();
        assert_eq!(r.rank, 1);
        let un = normalized(&u);
        assert!((inner_product(&r.column(0), &un).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pinv_solve_examples() {
        let tol = ToleranceContext::default();
        let a = pseudo_random(3, 2, 5);
        let sol = pinv_solve(&ComplexMatrix::identity(3), &a, &tol).unwrap();
        assert!(sol.factor.max_abs_diff(&a) < 1e-14);

        let b = ComplexMatrix::from_real_diagonal(&[2.0, 0.0]);
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        let sol = pinv_solve(&b, &a, &tol).unwrap();
        assert!(
            sol.factor
                .max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.5, 0.0]))
                < 1e-15
        );
        assert!(sol.residual < 1e-15);

        // construct-then-recover: C0 = B* Y lies in the row space of B
        let b = &pseudo_random(4, 2, 7) * &pseudo_random(2, 4, 8);
        let c0 = &b.adjoint() * &pseudo_random(4, 3, 9);
        let a = &b * &c0;
        let sol = pinv_solve(&b, &a, &tol).unwrap();
        assert!(sol.factor.max_abs_diff(&c0) < 1e-8);
        assert!(sol.residual <= tol.residual_tol * a.spectral_norm().unwrap());
    }

    #[test]
    fn psd_examples() {
        let tol = ToleranceContext::default();
        let t = pseudo_random(5, 5, 11);
        let gram = &t.adjoint() * &t;
        assert!(is_psd(&gram, &tol).unwrap().psd);

        let d = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let check = is_psd(&d, &tol).unwrap();
        assert!(!check.psd);
        assert!((check.min_eigenvalue + 1.0).abs() < 1e-15);

        // (P + P_4)^2 - P/4 is PSD with a zero eigenvalue
        let k = 4.0_f64;
        let s = (k - 1.0).sqrt();
        let m = ComplexMatrix::from_real_rows(&[
            [(4.0 * k - 3.0) / k - 1.0 / k, 2.0 * s / k],
            [2.0 * s / k, 1.0 / k],
        ])
        .unwrap();
        let check = is_psd(&m, &tol).unwrap();
        assert!(check.psd);
        assert!(check.min_eigenvalue.abs() < 1e-14);

        let skew = ComplexMatrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            is_psd(&skew, &tol),
            Err(NumericError::NotHermitian { .. })
        ));
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let tol = ToleranceContext::default();
        let t = pseudo_random(4, 4, 21);
        let gram = &t.adjoint() * &t;
        let root = psd_sqrt(&gram, &tol).unwrap();
        assert!((&root * &root).max_abs_diff(&gram) < 1e-12);
    }

    #[test]
    fn subspace_equality_detects_rotation() {
        let tol = ToleranceContext::default();
        let e1 = range_basis(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0]), &tol).unwrap();
        let e2 = range_basis(&ComplexMatrix::from_real_diagonal(&[0.0, 1.0]), &tol).unwrap();
        assert!(subspaces_equal(&e1, &e1, SUBSPACE_ANGLE_TOL).unwrap());
        assert!(!subspaces_equal(&e1, &e2, SUBSPACE_ANGLE_TOL).unwrap());
    }

    #[test]
    fn tolerance_validation() {
        assert!(ToleranceContext::new(1e-10, 1e-10, 1e-8).is_ok());
        assert!(ToleranceContext::new(1.0, 1e-10, 1e-8).is_err());
        assert!(ToleranceContext::uniform(-1e-3).is_err());
    }
}
