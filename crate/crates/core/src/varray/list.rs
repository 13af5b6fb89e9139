use std::ops::Range;

use rayon::prelude::*;

use super::{
    axpy_slice, check_index, check_range, dot, keep_mask, shape_err, ArrayError, SmallDense,
    VectorArray, VectorSpace,
};

/// One heap buffer per vector; only vector-vector kernels are used.
///
/// Every Gramian entry is an independent inner product and every linear
/// combination is a sequence of scaled vector additions. Entries are
/// distributed over the rayon pool, each computed by exactly one task, so the
/// result does not depend on the thread count.
#[derive(Debug, Clone, PartialEq)]
pub struct ListArray {
    space: VectorSpace,
    vectors: Vec<Vec<f64>>,
}

impl ListArray {
    pub(crate) fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

impl VectorArray for ListArray {
    const BACKEND: &'static str = "list";

    fn zeros(space: VectorSpace, k: usize) -> Self {
        Self {
            space,
            vectors: vec![vec![0.0; space.dim()]; k],
        }
    }

    fn from_columns<'a, I>(space: VectorSpace, columns: I) -> Result<Self, ArrayError>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut vectors = Vec::new();
        for c in columns {
            if c.len() != space.dim() {
                return Err(shape_err(
                    format!("column of length {}", space.dim()),
                    format!("length {}", c.len()),
                ));
            }
            vectors.push(c.to_vec());
        }
        Ok(Self { space, vectors })
    }

    fn space(&self) -> VectorSpace {
        self.space
    }

    fn len(&self) -> usize {
        self.vectors.len()
    }

    fn append(&mut self, source: &Self) -> Result<(), ArrayError> {
        self.space.check(&source.space)?;
        self.vectors.extend(source.vectors.iter().cloned());
        Ok(())
    }

    fn gramian(&self, other: &Self) -> Result<SmallDense, ArrayError> {
        self.space.check(&other.space)?;
        let (k, l) = (self.len(), other.len());
        let entries: Vec<f64> = (0..k * l)
            .into_par_iter()
            .map(|idx| {
                // column-major: idx = j * k + i
                let (i, j) = (idx % k, idx / k);
                dot(&self.vectors[i], &other.vectors[j])
            })
            .collect();
        Ok(SmallDense::from_vec(k, l, entries))
    }

    fn self_gramian(&self) -> SmallDense {
        let k = self.len();
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|j| (j..k).map(move |i| (i, j))).collect();
        let values: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| dot(&self.vectors[i], &self.vectors[j]))
            .collect();
        let mut x = SmallDense::zeros(k, k);
        for (&(i, j), v) in pairs.iter().zip(values) {
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
        x
    }

    fn lincomb(&self, coeffs: &SmallDense) -> Result<Self, ArrayError> {
        if coeffs.nrows() != self.len() {
            return Err(shape_err(
                format!("coefficients with {} rows", self.len()),
                format!("{} rows", coeffs.nrows()),
            ));
        }
        let m = self.space.dim();
        let vectors = (0..coeffs.ncols())
            .into_par_iter()
            .map(|j| {
                let mut out = vec![0.0; m];
                for (i, v) in self.vectors.iter().enumerate() {
                    let c = coeffs[(i, j)];
                    if c != 0.0 {
                        axpy_slice(&mut out, c, v);
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            space: self.space,
            vectors,
        })
    }

    fn axpy(&mut self, alpha: f64, source: &Self) -> Result<(), ArrayError> {
        self.space.check(&source.space)?;
        if self.len() != source.len() {
            return Err(shape_err(
                format!("{} columns", self.len()),
                format!("{} columns", source.len()),
            ));
        }
        self.vectors
            .par_iter_mut()
            .zip(source.vectors.par_iter())
            .for_each(|(y, x)| axpy_slice(y, alpha, x));
        Ok(())
    }

    fn remove_columns(&mut self, indices: &[usize]) -> Result<(), ArrayError> {
        let keep = keep_mask(self.len(), indices)?;
        let mut it = keep.iter();
        self.vectors.retain(|_| *it.next().unwrap());
        Ok(())
    }

    fn copy_columns(&self, range: Range<usize>) -> Result<Self, ArrayError> {
        check_range(&range, self.len())?;
        Ok(Self {
            space: self.space,
            vectors: self.vectors[range].to_vec(),
        })
    }

    fn column_dot(&self, i: usize, other: &Self, j: usize) -> Result<f64, ArrayError> {
        self.space.check(&other.space)?;
        check_index(i, self.len())?;
        check_index(j, other.len())?;
        Ok(dot(&self.vectors[i], &other.vectors[j]))
    }

    fn column_axpy(&mut self, target: usize, alpha: f64, source: usize) -> Result<(), ArrayError> {
        check_index(target, self.len())?;
        check_index(source, self.len())?;
        if target == source {
            return self.column_scale(target, 1.0 + alpha);
        }
        let src = std::mem::take(&mut self.vectors[source]);
        axpy_slice(&mut self.vectors[target], alpha, &src);
        self.vectors[source] = src;
        Ok(())
    }

    fn column_scale(&mut self, i: usize, alpha: f64) -> Result<(), ArrayError> {
        check_index(i, self.len())?;
        self.vectors[i].iter_mut().for_each(|v| *v *= alpha);
        Ok(())
    }
}
