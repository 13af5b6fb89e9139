//! Householder QR on dense matrices, used as an accuracy baseline.

use crate::varray::{SmallDense, UpperTriangular};

use super::QrError;

/// Economy-size Householder QR with a nonnegative diagonal in `R`.
pub fn reference_qr(a: &SmallDense) -> Result<(SmallDense, UpperTriangular), QrError> {
    let (m, n) = a.shape();
    if n == 0 {
        return Err(QrError::EmptyInput);
    }
    if m < n {
        return Err(QrError::TooFewRows { m, n });
    }
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    Ok((q, UpperTriangular::from_upper(r)?))
}
