//! Accuracy measures for computed factorizations.
//!
//! Norms here are exact: spectral norms come from a dense symmetric
//! eigensolve of an `n x n` Gramian, never from the power-iteration estimate
//! used inside the algorithms.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::varray::{ArrayError, SmallDense, VectorArray};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("reference matrix has zero norm")]
    ZeroNorm,
    #[error(transparent)]
    Array(#[from] ArrayError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    #[default]
    Spectral,
    Frobenius,
}

/// Loss of orthogonality, relative reconstruction residual and relative
/// Cholesky residual, all in the same norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub loo: f64,
    pub rrr: f64,
    pub rcr: f64,
    pub norm_used: Norm,
}

/// Largest absolute eigenvalue of a symmetric matrix.
pub fn symmetric_norm(x: &SmallDense) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(x.clone()).eigenvalues.amax()
}

fn sym_norm(x: &SmallDense, norm: Norm) -> f64 {
    match norm {
        Norm::Spectral => symmetric_norm(x),
        Norm::Frobenius => x.norm(),
    }
}

/// Norm of an array from its Gramian `G = A^T A`.
fn norm_from_gramian(g: &SmallDense, norm: Norm) -> f64 {
    match norm {
        Norm::Spectral => symmetric_norm(g).sqrt(),
        Norm::Frobenius => g.trace().max(0.0).sqrt(),
    }
}

fn residual_gramian(x: &SmallDense) -> SmallDense {
    let n = x.nrows();
    SmallDense::identity(n, n) - x
}

/// `||I - Q^T Q||_2`.
pub fn loss_of_orthogonality<V: VectorArray>(q: &V) -> f64 {
    symmetric_norm(&residual_gramian(&q.self_gramian()))
}

/// `||I - Q^T Q||_F`.
pub fn loss_of_orthogonality_fro<V: VectorArray>(q: &V) -> f64 {
    residual_gramian(&q.self_gramian()).norm()
}

/// `||A - Q R|| / ||A||`, where `r` may be rectangular (`q.len() x a.len()`).
pub fn reconstruction_residual<V: VectorArray>(
    a: &V,
    q: &V,
    r: &SmallDense,
) -> Result<f64, MetricsError> {
    reconstruction_residual_in(a, q, r, Norm::Spectral)
}

pub fn reconstruction_residual_in<V: VectorArray>(
    a: &V,
    q: &V,
    r: &SmallDense,
    norm: Norm,
) -> Result<f64, MetricsError> {
    let norm_a = norm_from_gramian(&a.self_gramian(), norm);
    if norm_a == 0.0 {
        return Err(MetricsError::ZeroNorm);
    }
    let mut diff = a.clone();
    diff.axpy(-1.0, &q.lincomb(r)?)?;
    Ok(norm_from_gramian(&diff.self_gramian(), norm) / norm_a)
}

/// `||A^T A - R^T R|| / ||A||^2`.
pub fn cholesky_residual<V: VectorArray>(a: &V, r: &SmallDense) -> Result<f64, MetricsError> {
    cholesky_residual_in(a, r, Norm::Spectral)
}

pub fn cholesky_residual_in<V: VectorArray>(
    a: &V,
    r: &SmallDense,
    norm: Norm,
) -> Result<f64, MetricsError> {
    let g = a.self_gramian();
    if r.ncols() != g.ncols() {
        return Err(ArrayError::ShapeMismatch {
            expected: format!("factor with {} columns", g.ncols()),
            actual: format!("{}x{}", r.nrows(), r.ncols()),
        }
        .into());
    }
    let norm_a2 = match norm {
        Norm::Spectral => symmetric_norm(&g),
        Norm::Frobenius => g.trace(),
    };
    if norm_a2 == 0.0 {
        return Err(MetricsError::ZeroNorm);
    }
    Ok(sym_norm(&(g - r.tr_mul(r)), norm) / norm_a2)
}

/// All three measures for `A = Q R`.
pub fn quality_report<V: VectorArray>(
    a: &V,
    q: &V,
    r: &SmallDense,
    norm: Norm,
) -> Result<QualityReport, MetricsError> {
    let loo = match norm {
        Norm::Spectral => loss_of_orthogonality(q),
        Norm::Frobenius => loss_of_orthogonality_fro(q),
    };
    Ok(QualityReport {
        loo,
        rrr: reconstruction_residual_in(a, q, r, norm)?,
        rcr: cholesky_residual_in(a, r, norm)?,
        norm_used: norm,
    })
}

/// `sigma_max / sigma_min` from a dense SVD.
pub fn condition_number(a: &SmallDense) -> f64 {
    let s = a.singular_values();
    let max = s.max();
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
