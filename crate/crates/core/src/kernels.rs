//! Small `n x n` kernels: Cholesky with breakdown detection, triangular
//! inverse and product, Frobenius norm, largest-eigenvalue estimate and the
//! shift formula. Each kernel charges its routine cost to the ledger it is
//! handed.

use nalgebra::{DVector, SymmetricEigen};
use thiserror::Error;

use crate::flops::{self, Category, FlopLedger};
use crate::varray::{SmallDense, UpperTriangular};

/// Unit roundoff of IEEE-754 binary64.
pub const DEFAULT_UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("triangular factor is singular: zero diagonal at index {index}")]
    Singular { index: usize },
    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("matrix is not symmetric (max deviation {deviation:e})")]
    Asymmetric { deviation: f64 },
    #[error("unit roundoff must lie in (0, 1e-7), got {0:e}")]
    BadRoundoff(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UnitRoundoff(f64);

impl UnitRoundoff {
    pub fn new(u: f64) -> Result<Self, KernelError> {
        if !(u > 0.0 && u < 1e-7) {
            return Err(KernelError::BadRoundoff(u));
        }
        Ok(Self(u))
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for UnitRoundoff {
    fn default() -> Self {
        Self(DEFAULT_UNIT_ROUNDOFF)
    }
}

/// Result of a Cholesky attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum CholOutcome {
    Factor(UpperTriangular),
    /// The Schur-complement diagonal at `pivot_index` was not positive.
    Breakdown {
        pivot_index: usize,
        pivot_value: f64,
    },
}

impl CholOutcome {
    pub fn factor(self) -> Option<UpperTriangular> {
        match self {
            CholOutcome::Factor(r) => Some(r),
            CholOutcome::Breakdown { .. } => None,
        }
    }
}

fn check_square(x: &SmallDense) -> Result<usize, KernelError> {
    if x.nrows() != x.ncols() {
        return Err(KernelError::NotSquare {
            rows: x.nrows(),
            cols: x.ncols(),
        });
    }
    Ok(x.nrows())
}

/// Upper Cholesky factor `R` with `R^T R = X`, reading only the upper
/// triangle of `X`. A pivot `<= 0` (or NaN) is reported as a breakdown; the
/// full factorization cost is charged either way.
pub fn cholesky(x: &SmallDense, ledger: &mut FlopLedger) -> Result<CholOutcome, KernelError> {
    let n = check_square(x)?;
    ledger.charge(Category::Potrf, flops::potrf_flops(n));
    let mut r = SmallDense::zeros(n, n);
    for j in 0..n {
        let mut d = x[(j, j)];
        for k in 0..j {
            d -= r[(k, j)] * r[(k, j)];
        }
        if !(d > 0.0) {
            return Ok(CholOutcome::Breakdown {
                pivot_index: j,
                pivot_value: d,
            });
        }
        let rjj = d.sqrt();
        r[(j, j)] = rjj;
        for i in (j + 1)..n {
            let mut s = x[(j, i)];
            for k in 0..j {
                s -= r[(k, j)] * r[(k, i)];
            }
            r[(j, i)] = s / rjj;
        }
    }
    Ok(CholOutcome::Factor(
        UpperTriangular::from_upper(r).expect("square by construction"),
    ))
}

/// Inverse of an upper triangular matrix by column-wise back substitution.
pub fn tri_inverse(
    r: &UpperTriangular,
    ledger: &mut FlopLedger,
) -> Result<UpperTriangular, KernelError> {
    let n = r.n();
    let a = r.as_matrix();
    if let Some(index) = (0..n).find(|&i| a[(i, i)] == 0.0) {
        return Err(KernelError::Singular { index });
    }
    ledger.charge(Category::Trtri, flops::trtri_flops(n));
    let mut inv = SmallDense::zeros(n, n);
    for j in 0..n {
        inv[(j, j)] = 1.0 / a[(j, j)];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for k in (i + 1)..=j {
                s += a[(i, k)] * inv[(k, j)];
            }
            inv[(i, j)] = -s / a[(i, i)];
        }
    }
    Ok(UpperTriangular::from_upper(inv).expect("square by construction"))
}

/// Product of two upper triangular matrices, `left * right`.
pub fn tri_multiply(
    left: &UpperTriangular,
    right: &UpperTriangular,
    ledger: &mut FlopLedger,
) -> Result<UpperTriangular, KernelError> {
    let n = left.n();
    if right.n() != n {
        return Err(KernelError::SizeMismatch {
            left: n,
            right: right.n(),
        });
    }
    ledger.charge(Category::Trmm, flops::trmm_flops(n));
    let (a, b) = (left.as_matrix(), right.as_matrix());
    let mut c = SmallDense::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let mut s = 0.0;
            for k in i..=j {
                s += a[(i, k)] * b[(k, j)];
            }
            c[(i, j)] = s;
        }
    }
    Ok(UpperTriangular::from_upper(c).expect("square by construction"))
}

/// Frobenius norm. Charges `2n^2 + n` for an `n x n` input (`2rc + c` in
/// general).
pub fn frobenius(x: &SmallDense, ledger: &mut FlopLedger) -> f64 {
    let (r, c) = (x.nrows() as u64, x.ncols() as u64);
    ledger.charge(Category::FroNorm, 2 * r * c + c);
    frobenius_pure(x)
}

pub(crate) fn frobenius_pure(x: &SmallDense) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Settings of the power iteration behind [`spectral_norm_estimate`].
pub const SPECTRAL_TOL: f64 = 1e-2;
pub const SPECTRAL_MAX_ITER: usize = 100;

/// Estimate of the largest eigenvalue of a symmetric (near-)PSD matrix.
///
/// Restarted Lanczos from the all-ones vector with a basis of `min(n, 20)`
/// vectors, stopped once the Ritz residual of the largest-magnitude Ritz
/// value drops below `1e-2 * |theta|`. If that does not happen within 100
/// restarts the Frobenius norm is returned instead, which bounds the spectral
/// norm from above. The ledger is charged `38n^2 + 1520n` regardless
/// of the number of steps taken.
pub fn spectral_norm_estimate(x: &SmallDense, ledger: &mut FlopLedger) -> Result<f64, KernelError> {
    let n = check_square(x)?;
    let scale = x.amax();
    let deviation = (0..n)
        .flat_map(|j| (0..j).map(move |i| (i, j)))
        .map(|(i, j)| (x[(i, j)] - x[(j, i)]).abs())
        .fold(0.0, f64::max);
    if deviation > 1e-12 * scale {
        return Err(KernelError::Asymmetric { deviation });
    }
    ledger.charge(Category::EigEst, flops::eig_est_flops(n));
    if n == 0 || scale == 0.0 {
        return Ok(0.0);
    }
    let fro = frobenius_pure(x);
    Ok(lanczos(x).map_or(fro, |theta| theta.abs().min(fro)))
}

/// Lanczos basis size, as in ARPACK's default `min(n, 20)` for one eigenvalue.
pub const LANCZOS_BASIS: usize = 20;

/// Largest-magnitude Ritz value and its residual bound from explicitly
/// restarted Lanczos with full reorthogonalization.
fn lanczos(x: &SmallDense) -> Option<f64> {
    let n = x.nrows();
    let k = n.min(LANCZOS_BASIS);
    let tiny = f64::EPSILON * x.amax() * n as f64;
    let mut start = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    for _ in 0..SPECTRAL_MAX_ITER {
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
        let mut alpha = Vec::with_capacity(k);
        let mut beta: Vec<f64> = Vec::with_capacity(k);
        let mut v = start.clone();
        let mut last_beta = 0.0;
        for j in 0..k {
            let mut w = x * &v;
            let a = v.dot(&w);
            basis.push(v.clone());
            alpha.push(a);
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&w);
                    w.axpy(-c, b, 1.0);
                }
            }
            last_beta = w.norm();
            if j + 1 == k || last_beta <= tiny {
                break;
            }
            beta.push(last_beta);
            v = w / last_beta;
        }
        let size = alpha.len();
        let tri = SmallDense::from_fn(size, size, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(tri);
        let top = eig.eigenvalues.iamax();
        let theta = eig.eigenvalues[top];
        if !theta.is_finite() {
            return None;
        }
        let s = eig.eigenvectors.column(top);
        let resid = (last_beta * s[size - 1]).abs();
        if resid <= SPECTRAL_TOL * theta.abs() || size == n {
            return Some(theta);
        }
        let mut next = DVector::zeros(n);
        for (b, c) in basis.iter().zip(s.iter()) {
            next.axpy(*c, b, 1.0);
        }
        let norm = next.norm();
        if norm == 0.0 {
            return None;
        }
        start = next / norm;
    }
    None
}

/// Shift `max(11 (m n + n (n + 1)) u ||X||, 2u)`.
pub fn compute_shift(m: usize, n: usize, norm_x: f64, u: UnitRoundoff) -> f64 {
    let (m, n) = (m as f64, n as f64);
    let u = u.get();
    (11.0 * (m * n + n * (n + 1.0)) * u * norm_x).max(2.0 * u)
}

/// `X + sigma I` on a copy.
pub(crate) fn add_shift(x: &SmallDense, sigma: f64) -> SmallDense {
    let mut y = x.clone();
    for i in 0..y.nrows() {
        y[(i, i)] += sigma;
    }
    y
}
