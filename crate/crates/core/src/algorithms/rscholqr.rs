//! Iterated Cholesky QR with the shift recomputed from the current Gramian.

use crate::flops::{Category, FlopLedger, IterationProfile};
use crate::kernels::{self, CholOutcome};
use crate::varray::{SmallDense, UpperTriangular, VectorArray};

use super::{
    apply_inverse, ensure_nonempty, gram, orthogonality_residual, shifted_cholesky, AlgoConfig,
    QrError, QrResult,
};

/// Repeats `Q <- Q R~^{-1}` until `||Q^T Q - I||_F < tol`.
///
/// When the Cholesky factorization of `X = Q^T Q` breaks down, `X + sigma I`
/// is factored instead, with `sigma` derived from an estimate of `||X||_2`.
/// If that also fails the shift is multiplied by `cfg.shift_escalation`
/// until it succeeds or `cfg.max_shift_attempts` shifts have been tried.
pub fn rs_chol_qr<V: VectorArray>(
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
    let mut shifts = Vec::new();
    let mut profile = IterationProfile::default();

    loop {
        let residual = orthogonality_residual(&x, ledger);
        if residual < tol {
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
                let norm = kernels::spectral_norm_estimate(&x, ledger)?;
                let sigma = kernels::compute_shift(m, n, norm, cfg.u);
                shifted_until_success(&x, sigma, cfg, &mut shifts, ledger)?
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

/// Factors `X + sigma I`, escalating `sigma` on breakdown. Returns the factor
/// and the number of shifted attempts.
fn shifted_until_success(
    x: &SmallDense,
    mut sigma: f64,
    cfg: &AlgoConfig,
    shifts: &mut Vec<f64>,
    ledger: &mut FlopLedger,
) -> Result<(UpperTriangular, usize), QrError> {
    for attempt in 1..=cfg.max_shift_attempts {
        if attempt > 1 {
            ledger.charge(Category::EigEst, 1);
            sigma *= cfg.shift_escalation;
        }
        shifts.push(sigma);
        if let CholOutcome::Factor(rt) = shifted_cholesky(x, sigma, ledger)? {
            return Ok((rt, attempt));
        }
    }
    Err(QrError::ShiftAttemptLimitExceeded {
        attempts: cfg.max_shift_attempts,
        last_shift: sigma,
    })
}
