//! Single, repeated, shifted-three-pass and iterated-with-fixed-shift
//! Cholesky QR.

use crate::flops::{FlopLedger, IterationProfile};
use crate::kernels::{self, CholOutcome};
use crate::varray::{UpperTriangular, VectorArray};

use super::{
    apply_inverse, ensure_nonempty, gram, orthogonality_residual, shifted_cholesky, AlgoConfig,
    QrError, QrResult,
};

fn unshifted_pass<V: VectorArray>(
    q: &V,
    pass: usize,
    ledger: &mut FlopLedger,
) -> Result<(V, UpperTriangular), QrError> {
    let x = gram(q, ledger);
    match kernels::cholesky(&x, ledger)? {
        CholOutcome::Factor(r) => Ok((apply_inverse(q, &r, ledger)?, r)),
        CholOutcome::Breakdown {
            pivot_index,
            pivot_value,
        } => Err(QrError::CholeskyBreakdown {
            pass,
            pivot_index,
            pivot_value,
        }),
    }
}

fn finished<V>(q: V, r: UpperTriangular, passes: usize, shifts: Vec<f64>) -> QrResult<V> {
    let y = usize::from(!shifts.is_empty());
    let mut profile = IterationProfile::uniform(passes, 0);
    if y > 0 {
        profile.shift_attempts[0] = 1;
    }
    QrResult {
        q,
        r,
        iterations: passes,
        shifts_applied: shifts,
        profiles: vec![profile],
        dropped: Vec::new(),
    }
}

/// One pass: `R = chol(A^T A)`, `Q = A R^{-1}`.
pub fn chol_qr<V: VectorArray>(
    a: &V,
    cfg: &AlgoConfig,
    ledger: &mut FlopLedger,
) -> Result<QrResult<V>, QrError> {
    cfg.validate()?;
    ensure_nonempty(a)?;
    let (q, r) = unshifted_pass(a, 1, ledger)?;
    Ok(finished(q, r, 1, Vec::new()))
}

/// Two unshifted passes with `R = R_2 R_1`.
pub fn chol_qr2<V: VectorArray>(
    a: &V,
    cfg: &AlgoConfig,
    ledger: &mut FlopLedger,
) -> Result<QrResult<V>, QrError> {
    cfg.validate()?;
    ensure_nonempty(a)?;
    let (q1, r1) = unshifted_pass(a, 1, ledger)?;
    let (q, r2) = unshifted_pass(&q1, 2, ledger)?;
    let r = kernels::tri_multiply(&r2, &r1, ledger)?;
    Ok(finished(q, r, 2, Vec::new()))
}

/// A shifted first pass followed by two unshifted ones.
///
/// The shift comes from the largest-eigenvalue estimate of `A^T A`.
pub fn s_chol_qr3<V: VectorArray>(
    a: &V,
    cfg: &AlgoConfig,
    ledger: &mut FlopLedger,
) -> Result<QrResult<V>, QrError> {
    cfg.validate()?;
    ensure_nonempty(a)?;
    let (m, n) = (a.dim(), a.len());
    let x = gram(a, ledger);
    let norm = kernels::spectral_norm_estimate(&x, ledger)?;
    let sigma = kernels::compute_shift(m, n, norm, cfg.u);
    let r1 = match shifted_cholesky(&x, sigma, ledger)? {
        CholOutcome::Factor(r) => r,
        CholOutcome::Breakdown {
            pivot_index,
            pivot_value,
        } => {
            return Err(QrError::CholeskyBreakdown {
                pass: 1,
                pivot_index,
                pivot_value,
            })
        }
    };
    let q1 = apply_inverse(a, &r1, ledger)?;
    let (q2, r2) = unshifted_pass(&q1, 2, ledger)?;
    let (q, r3) = unshifted_pass(&q2, 3, ledger)?;
    let r = kernels::tri_multiply(&r3, &kernels::tri_multiply(&r2, &r1, ledger)?, ledger)?;
    Ok(finished(q, r, 3, vec![sigma]))
}

/// Iterated Cholesky QR that shifts only when a factorization breaks down,
/// always with the same shift computed once from `||A||^2`.
pub fn is_chol_qr<V: VectorArray>(
    a: &V,
    cfg: &AlgoConfig,
    ledger: &mut FlopLedger,
) -> Result<QrResult<V>, QrError> {
    cfg.validate()?;
    ensure_nonempty(a)?;
    let (m, n) = (a.dim(), a.len());
    let tol = cfg.threshold(n);

    let mut q = a.clone();
    let mut r = UpperTriangular::identity(n);
    let mut x = gram(&q, ledger);
    let first_gramian = x.clone();
    let mut sigma0: Option<f64> = None;
    let mut shifts = Vec::new();
    let mut profile = IterationProfile::default();

    loop {
        let residual = orthogonality_residual(&x, ledger);
        if residual <= tol {
            break;
        }
        if profile.outer() == cfg.max_iter {
            return Err(QrError::IterationLimitExceeded {
                iterations: profile.outer(),
                residual,
            });
        }
        let (r_step, y) = match kernels::cholesky(&x, ledger)? {
            CholOutcome::Factor(rt) => (rt, 0),
            CholOutcome::Breakdown { .. } => {
                let sigma = match sigma0 {
                    Some(s) => s,
                    None => {
                        let norm_a2 = kernels::spectral_norm_estimate(&first_gramian, ledger)?;
                        *sigma0.insert(kernels::compute_shift(m, n, norm_a2, cfg.u))
                    }
                };
                shifts.push(sigma);
                match shifted_cholesky(&x, sigma, ledger)? {
                    CholOutcome::Factor(rt) => (rt, 1),
                    CholOutcome::Breakdown {
                        pivot_index,
                        pivot_value,
                    } => {
                        return Err(QrError::CholeskyBreakdown {
                            pass: profile.outer() + 1,
                            pivot_index,
                            pivot_value,
                        })
                    }
                }
            }
        };
        q = apply_inverse(&q, &r_step, ledger)?;
        r = kernels::tri_multiply(&r_step, &r, ledger)?;
        x = gram(&q, ledger);
        profile.push(y);
    }

    Ok(QrResult {
        q,
        r,
        iterations: profile.outer(),
        shifts_applied: shifts,
        profiles: vec![profile],
        dropped: Vec::new(),
    })
}
