use std::ops::Range;

use nalgebra::{DMatrix, DMatrixView};

use super::{
    axpy_slice, check_index, check_range, dot, keep_mask, shape_err, symmetrize, ArrayError,
    SmallDense, VectorArray, VectorSpace,
};

/// Columns stored as one contiguous column-major block.
///
/// Gramians and linear combinations run as single matrix-matrix products.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseArray {
    space: VectorSpace,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseArray {
    /// Wraps an existing `dim x k` matrix.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self, ArrayError> {
        let space = VectorSpace::new(m.nrows())?;
        let ncols = m.ncols();
        Ok(Self {
            space,
            ncols,
            data: m.as_slice().to_vec(),
        })
    }

    /// Dense view of the whole block. Only available on this backend; the
    /// generic algorithms never call it.
    pub fn as_matrix(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.data, self.space.dim(), self.ncols)
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        self.as_matrix().into_owned()
    }

    fn col(&self, i: usize) -> &[f64] {
        let m = self.space.dim();
        &self.data[i * m..(i + 1) * m]
    }

    fn col_mut(&mut self, i: usize) -> &mut [f64] {
        let m = self.space.dim();
        &mut self.data[i * m..(i + 1) * m]
    }
}

impl VectorArray for DenseArray {
    const BACKEND: &'static str = "dense";

    fn zeros(space: VectorSpace, k: usize) -> Self {
        Self {
            space,
            ncols: k,
            data: vec![0.0; space.dim() * k],
        }
    }

    fn from_columns<'a, I>(space: VectorSpace, columns: I) -> Result<Self, ArrayError>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut data = Vec::new();
        let mut ncols = 0;
        for c in columns {
            if c.len() != space.dim() {
                return Err(shape_err(
                    format!("column of length {}", space.dim()),
                    format!("length {}", c.len()),
                ));
            }
            data.extend_from_slice(c);
            ncols += 1;
        }
        Ok(Self { space, ncols, data })
    }

    fn space(&self) -> VectorSpace {
        self.space
    }

    fn len(&self) -> usize {
        self.ncols
    }

    fn append(&mut self, source: &Self) -> Result<(), ArrayError> {
        self.space.check(&source.space)?;
        self.data.extend_from_slice(&source.data);
        self.ncols += source.ncols;
        Ok(())
    }

    fn gramian(&self, other: &Self) -> Result<SmallDense, ArrayError> {
        self.space.check(&other.space)?;
        Ok(tr_gemm(self, other))
    }

    fn self_gramian(&self) -> SmallDense {
        let mut x = tr_gemm(self, self);
        symmetrize(&mut x);
        x
    }

    fn lincomb(&self, coeffs: &SmallDense) -> Result<Self, ArrayError> {
        if coeffs.nrows() != self.ncols {
            return Err(shape_err(
                format!("coefficients with {} rows", self.ncols),
                format!("{} rows", coeffs.nrows()),
            ));
        }
        let out = self.as_matrix() * coeffs;
        Ok(Self {
            space: self.space,
            ncols: coeffs.ncols(),
            data: out.data.into(),
        })
    }

    fn axpy(&mut self, alpha: f64, source: &Self) -> Result<(), ArrayError> {
        self.space.check(&source.space)?;
        if self.ncols != source.ncols {
            return Err(shape_err(
                format!("{} columns", self.ncols),
                format!("{} columns", source.ncols),
            ));
        }
        axpy_slice(&mut self.data, alpha, &source.data);
        Ok(())
    }

    fn remove_columns(&mut self, indices: &[usize]) -> Result<(), ArrayError> {
        let keep = keep_mask(self.ncols, indices)?;
        let m = self.space.dim();
        let mut write = 0;
        for (read, &k) in keep.iter().enumerate() {
            if k {
                if write != read {
                    self.data.copy_within(read * m..(read + 1) * m, write * m);
                }
                write += 1;
            }
        }
        self.data.truncate(write * m);
        self.ncols = write;
        Ok(())
    }

    fn copy_columns(&self, range: Range<usize>) -> Result<Self, ArrayError> {
        check_range(&range, self.ncols)?;
        let m = self.space.dim();
        Ok(Self {
            space: self.space,
            ncols: range.len(),
            data: self.data[range.start * m..range.end * m].to_vec(),
        })
    }

    fn column_dot(&self, i: usize, other: &Self, j: usize) -> Result<f64, ArrayError> {
        self.space.check(&other.space)?;
        check_index(i, self.ncols)?;
        check_index(j, other.ncols)?;
        Ok(dot(self.col(i), other.col(j)))
    }

    fn column_axpy(&mut self, target: usize, alpha: f64, source: usize) -> Result<(), ArrayError> {
        check_index(target, self.ncols)?;
        check_index(source, self.ncols)?;
        if target == source {
            self.column_scale(target, 1.0 + alpha)?;
            return Ok(());
        }
        let m = self.space.dim();
        let (t, s) = if target < source {
            let (lo, hi) = self.data.split_at_mut(source * m);
            (&mut lo[target * m..(target + 1) * m], &hi[..m])
        } else {
            let (lo, hi) = self.data.split_at_mut(target * m);
            (&mut hi[..m], &lo[source * m..(source + 1) * m])
        };
        axpy_slice(t, alpha, s);
        Ok(())
    }

    fn column_scale(&mut self, i: usize, alpha: f64) -> Result<(), ArrayError> {
        check_index(i, self.ncols)?;
        self.col_mut(i).iter_mut().for_each(|v| *v *= alpha);
        Ok(())
    }
}

/// `a^T b` as one blocked matrix product; `a^T` is read through swapped
/// strides.
fn tr_gemm(a: &DenseArray, b: &DenseArray) -> SmallDense {
    let (m, k, n) = (a.ncols, a.space.dim(), b.ncols);
    let mut out = SmallDense::zeros(m, n);
    if m == 0 || n == 0 {
        return out;
    }
    // SAFETY: the buffers hold k*m, k*n and m*n entries, and the strides
    // describe a^T (m x k), b (k x n) and out (m x n) inside them.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            k as isize,
            1,
            b.data.as_ptr(),
            1,
            k as isize,
            0.0,
            out.as_mut_slice().as_mut_ptr(),
            1,
            m as isize,
        );
    }
    out
}
