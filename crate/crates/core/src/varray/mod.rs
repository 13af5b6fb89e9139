//! Column-access-only tall matrices.
//!
//! A [`VectorArray`] is an `m x k` matrix whose columns can only be combined as
//! whole vectors: inner products, linear combinations, scaled additions,
//! appends and deletions. Nothing in the interface names a row or a single
//! entry. All `n x n`-sized math (Gramians, triangular factors) happens on
//! [`SmallDense`] and [`UpperTriangular`] values instead.
//!
//! Two backends are provided. [`DenseArray`] keeps the columns in one
//! contiguous column-major block and maps Gramians and linear combinations onto
//! matrix-matrix products. [`ListArray`] keeps one buffer per vector and is
//! restricted to vector-vector kernels, so every Gramian entry is a separate
//! inner product.

mod dense;
mod list;
pub mod mm;

use std::fmt;
use std::ops::Range;

use nalgebra::DMatrix;
use thiserror::Error;

pub use dense::DenseArray;
pub use list::ListArray;

/// Small dense matrix holding Gramians, coefficient blocks and similar.
pub type SmallDense = DMatrix<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArrayError {
    #[error("vector space mismatch: dim {left} vs dim {right}")]
    SpaceMismatch { left: usize, right: usize },
    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },
    #[error("column index {index} out of range for array with {len} columns")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("column index {0} listed more than once")]
    DuplicateIndex(usize),
    #[error("vector space dimension must be positive")]
    EmptySpace,
}

/// The ambient space of a vector array. Only its dimension is tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VectorSpace {
    dim: usize,
}

impl VectorSpace {
    pub fn new(dim: usize) -> Result<Self, ArrayError> {
        if dim == 0 {
            return Err(ArrayError::EmptySpace);
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn check(&self, other: &VectorSpace) -> Result<(), ArrayError> {
        if self.dim != other.dim {
            return Err(ArrayError::SpaceMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }
}

/// A tall matrix that only supports whole-column operations.
///
/// Implementations must give the same results (up to floating-point
/// reassociation) for every operation; only the cost profile differs.
pub trait VectorArray: Clone + Send + Sync + fmt::Debug + Sized {
    /// Short backend label used in reports.
    const BACKEND: &'static str;

    fn zeros(space: VectorSpace, k: usize) -> Self;

    /// Builds an array from column vectors. Each column must have length
    /// `space.dim()`.
    fn from_columns<'a, I>(space: VectorSpace, columns: I) -> Result<Self, ArrayError>
    where
        I: IntoIterator<Item = &'a [f64]>;

    fn space(&self) -> VectorSpace;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dim(&self) -> usize {
        self.space().dim()
    }

    /// Copies the columns of `source` after the existing columns.
    fn append(&mut self, source: &Self) -> Result<(), ArrayError>;

    /// `self^T * other`, shape `self.len() x other.len()`.
    fn gramian(&self, other: &Self) -> Result<SmallDense, ArrayError>;

    /// `self^T * self`, symmetrized so the result is exactly symmetric.
    fn self_gramian(&self) -> SmallDense;

    /// New array whose column `j` is `sum_i self_i * coeffs[(i, j)]`.
    fn lincomb(&self, coeffs: &SmallDense) -> Result<Self, ArrayError>;

    /// `self <- self + alpha * source`, columnwise.
    fn axpy(&mut self, alpha: f64, source: &Self) -> Result<(), ArrayError>;

    /// Removes the listed columns, keeping the order of the rest.
    fn remove_columns(&mut self, indices: &[usize]) -> Result<(), ArrayError>;

    /// Copy of a contiguous range of columns.
    fn copy_columns(&self, range: Range<usize>) -> Result<Self, ArrayError>;

    /// Inner product of column `i` of `self` with column `j` of `other`.
    fn column_dot(&self, i: usize, other: &Self, j: usize) -> Result<f64, ArrayError>;

    /// Column `target <- target + alpha * column source`, both in `self`.
    fn column_axpy(&mut self, target: usize, alpha: f64, source: usize) -> Result<(), ArrayError>;

    fn column_scale(&mut self, i: usize, alpha: f64) -> Result<(), ArrayError>;

    fn column_norm(&self, i: usize) -> Result<f64, ArrayError> {
        Ok(self.column_dot(i, self, i)?.max(0.0).sqrt())
    }
}

/// Square matrix whose strict lower triangle is exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular(SmallDense);

impl UpperTriangular {
    pub fn identity(n: usize) -> Self {
        Self(SmallDense::identity(n, n))
    }

    pub fn empty() -> Self {
        Self(SmallDense::zeros(0, 0))
    }

    /// Takes the upper triangle of a square matrix, zeroing the rest.
    pub fn from_upper(mut m: SmallDense) -> Result<Self, ArrayError> {
        if m.nrows() != m.ncols() {
            return Err(shape_err(
                "square matrix",
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        m.fill_lower_triangle(0.0, 1);
        Ok(Self(m))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(SmallDense::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else {
                0.0
            }
        }))
    }

    /// Block assembly `[[r_in, b], [0, r]]`.
    pub fn assemble(r_in: &Self, b: &SmallDense, r: &Self) -> Result<Self, ArrayError> {
        let (q, p) = (r_in.n(), r.n());
        if b.nrows() != q || b.ncols() != p {
            return Err(shape_err(
                format!("{q}x{p} coupling block"),
                format!("{}x{}", b.nrows(), b.ncols()),
            ));
        }
        let mut out = SmallDense::zeros(q + p, q + p);
        out.view_mut((0, 0), (q, q)).copy_from(&r_in.0);
        out.view_mut((0, q), (q, p)).copy_from(b);
        out.view_mut((q, q), (p, p)).copy_from(&r.0);
        Ok(Self(out))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &SmallDense {
        &self.0
    }

    pub fn into_matrix(self) -> SmallDense {
        self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.0[(i, i)]).collect()
    }
}

pub(crate) fn shape_err(expected: impl Into<String>, actual: impl Into<String>) -> ArrayError {
    ArrayError::ShapeMismatch {
        expected: expected.into(),
        actual: actual.into(),
    }
}

/// Validates a removal list and returns a keep-mask.
pub(crate) fn keep_mask(len: usize, indices: &[usize]) -> Result<Vec<bool>, ArrayError> {
    let mut keep = vec![true; len];
    for &i in indices {
        if i >= len {
            return Err(ArrayError::IndexOutOfRange { index: i, len });
        }
        if !keep[i] {
            return Err(ArrayError::DuplicateIndex(i));
        }
        keep[i] = false;
    }
    Ok(keep)
}

pub(crate) fn check_index(i: usize, len: usize) -> Result<(), ArrayError> {
    if i >= len {
        return Err(ArrayError::IndexOutOfRange { index: i, len });
    }
    Ok(())
}

pub(crate) fn check_range(range: &Range<usize>, len: usize) -> Result<(), ArrayError> {
    if range.start > range.end || range.end > len {
        return Err(shape_err(
            format!("column range within 0..{len}"),
            format!("{}..{}", range.start, range.end),
        ));
    }
    Ok(())
}

/// Makes a square matrix exactly symmetric: `(X + X^T) / 2`.
pub(crate) fn symmetrize(x: &mut SmallDense) {
    let n = x.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (x[(i, j)] + x[(j, i)]);
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
}

/// Inner product with blocked accumulation.
///
/// Partial sums are kept per block of `BLOCK` entries in four lanes and then
/// added up, which keeps the rounding error growth near `u * sqrt(len / BLOCK)`
/// instead of `u * sqrt(len)` for long vectors.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    const BLOCK: usize = 512;
    debug_assert_eq!(a.len(), b.len());
    let mut total = 0.0;
    for (ca, cb) in a.chunks(BLOCK).zip(b.chunks(BLOCK)) {
        let mut lanes = [0.0f64; 4];
        let mut ia = ca.chunks_exact(4);
        let mut ib = cb.chunks_exact(4);
        for (x, y) in (&mut ia).zip(&mut ib) {
            lanes[0] += x[0] * y[0];
            lanes[1] += x[1] * y[1];
            lanes[2] += x[2] * y[2];
            lanes[3] += x[3] * y[3];
        }
        let mut tail = 0.0;
        for (x, y) in ia.remainder().iter().zip(ib.remainder()) {
            tail += x * y;
        }
        total += (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]) + tail;
    }
    total
}

pub(crate) fn axpy_slice(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
