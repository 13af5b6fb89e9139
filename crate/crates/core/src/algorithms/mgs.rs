//! Modified Gram-Schmidt with reorthogonalization and column dropping.

use crate::flops::{Category, FlopLedger, IterationProfile};
use crate::varray::{SmallDense, UpperTriangular, VectorArray};

use super::{ensure_nonempty, AlgoConfig, QrError, QrResult};

pub const DEFAULT_DROP_TOL: f64 = 1e-13;

/// Orthonormalizes the columns of `a` left to right, projecting each one
/// twice against the columns kept so far.
///
/// A column whose remaining norm is at most `drop_tol` times its original
/// norm is dropped. `R` only covers the kept columns; the dropped input
/// indices are listed in [`QrResult::dropped`].
pub fn mgs<V: VectorArray>(
    a: &V,
    cfg: &AlgoConfig,
    drop_tol: f64,
    ledger: &mut FlopLedger,
) -> Result<QrResult<V>, QrError> {
    cfg.validate()?;
    ensure_nonempty(a)?;
    if !(drop_tol >= 0.0) {
        return Err(QrError::InvalidConfig(format!(
            "drop tolerance must be nonnegative, got {drop_tol}"
        )));
    }
    let (m, n) = (a.dim(), a.len());
    let level1 = 2 * m as u64;

    let mut w = a.clone();
    let mut r = SmallDense::zeros(n, n);
    let mut kept: Vec<usize> = Vec::with_capacity(n);
    let mut dropped = Vec::new();

    for j in 0..n {
        ledger.charge(Category::Gemm, level1);
        let original = w.column_norm(j)?;
        for _pass in 0..2 {
            for &k in &kept {
                ledger.charge(Category::Gemm, 2 * level1);
                let c = w.column_dot(k, &w, j)?;
                w.column_axpy(j, -c, k)?;
                r[(k, j)] += c;
            }
        }
        ledger.charge(Category::Gemm, level1);
        let norm = w.column_norm(j)?;
        if norm <= drop_tol * original || norm == 0.0 {
            dropped.push(j);
            continue;
        }
        ledger.charge(Category::Gemm, m as u64);
        w.column_scale(j, 1.0 / norm)?;
        r[(j, j)] = norm;
        kept.push(j);
    }

    w.remove_columns(&dropped)?;
    let compact = r.select_rows(&kept).select_columns(&kept);
    Ok(QrResult {
        q: w,
        r: UpperTriangular::from_upper(compact)?,
        iterations: 2,
        shifts_applied: Vec::new(),
        profiles: vec![IterationProfile::uniform(2, 0)],
        dropped,
    })
}
