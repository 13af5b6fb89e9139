//! Extending an orthonormal basis and its triangular factor by new columns.

use crate::flops::{Category, FlopLedger, IterationProfile};
use crate::kernels::{self, CholOutcome};
use crate::varray::{shape_err, symmetrize, SmallDense, UpperTriangular, VectorArray};

use super::{
    apply_inverse, orthogonality_residual, shifted_cholesky, AlgoConfig, QrError, ShiftWidth,
    UpdateResult,
};

/// The new blocks of an update, before assembly.
pub(crate) struct UpdateBlocks<V> {
    pub q: V,
    pub b: SmallDense,
    pub r: UpperTriangular,
    pub shifts: Vec<f64>,
    pub profile: IterationProfile,
}

/// Given `A_prev = Q_in R_in` with orthonormal `Q_in`, computes the QR
/// decomposition of `[A_prev, A_new]` as `[Q_in, Q] [[R_in, B], [0, R]]`.
pub fn chol_qr_update<V: VectorArray>(
    q_in: &V,
    r_in: &UpperTriangular,
    a_new: &V,
    cfg: &AlgoConfig,
    ledger: &mut FlopLedger,
) -> Result<UpdateResult<V>, QrError> {
    if r_in.n() != q_in.len() {
        return Err(shape_err(
            format!("{0}x{0} factor", q_in.len()),
            format!("{0}x{0}", r_in.n()),
        )
        .into());
    }
    let blocks = update_blocks(q_in, a_new.clone(), cfg, ledger)?;
    let r_out = UpperTriangular::assemble(r_in, &blocks.b, &blocks.r)?;
    let mut q_out = q_in.clone();
    q_out.append(&blocks.q)?;
    Ok(UpdateResult {
        q_out,
        r_out,
        iterations: blocks.profile.outer(),
        shifts_applied: blocks.shifts,
        profile: blocks.profile,
    })
}

/// Coupling `B~ = Q_in^T Q` and projected Gramian `X = Q^T Q - B~^T B~`.
fn coupled_gramian<V: VectorArray>(
    q_in: &V,
    q: &V,
    ledger: &mut FlopLedger,
) -> Result<(SmallDense, SmallDense), QrError> {
    let (m, qn, p) = (q.dim(), q_in.len(), q.len());
    ledger.gemm(qn, m, p);
    let bt = q_in.gramian(q)?;
    ledger.gemm(p, m, p);
    ledger.gemm(p, qn, p);
    ledger.charge(Category::Gemm, (p * p) as u64);
    let mut x = q.self_gramian() - bt.tr_mul(&bt);
    symmetrize(&mut x);
    Ok((bt, x))
}

pub(crate) fn update_blocks<V: VectorArray>(
    q_in: &V,
    a_new: V,
    cfg: &AlgoConfig,
    ledger: &mut FlopLedger,
) -> Result<UpdateBlocks<V>, QrError> {
    cfg.validate()?;
    if a_new.is_empty() {
        return Err(QrError::EmptyInput);
    }
    q_in.space().check(&a_new.space())?;
    let (m, qn, p) = (a_new.dim(), q_in.len(), a_new.len());
    let width = match cfg.shift_width {
        ShiftWidth::Existing => qn,
        ShiftWidth::New => p,
    };
    let tol = cfg.threshold(p);
    let two_u = 2.0 * cfg.u.get();

    let mut q = a_new;
    let mut b = SmallDense::zeros(qn, p);
    let mut r = UpperTriangular::identity(p);
    let mut shifts = Vec::new();
    let mut profile = IterationProfile::default();
    let (mut bt, mut x) = coupled_gramian(q_in, &q, ledger)?;

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

        let mut sigma = 0.0;
        let mut y = 0;
        let r_step = loop {
            if let CholOutcome::Factor(rt) = shifted_cholesky(&x, sigma, ledger)? {
                break rt;
            }
            y += 1;
            if y > cfg.max_shift_attempts {
                return Err(QrError::ShiftAttemptLimitExceeded {
                    attempts: cfg.max_shift_attempts,
                    last_shift: sigma,
                });
            }
            sigma = if sigma == 0.0 {
                let norm = kernels::spectral_norm_estimate(&x, ledger)?;
                kernels::compute_shift(m, width, norm, cfg.u)
            } else {
                ledger.charge(Category::EigEst, 1);
                sigma * cfg.shift_escalation
            }
            .max(two_u);
            shifts.push(sigma);
        };

        // Q <- (Q - Q_in B~) R~^{-1}
        ledger.gemm(m, qn, p);
        ledger.charge(Category::Gemm, (m * p) as u64);
        if qn > 0 {
            q.axpy(-1.0, &q_in.lincomb(&bt)?)?;
        }
        q = apply_inverse(&q, &r_step, ledger)?;

        // B <- B + B~ R
        ledger.gemm(qn, p, p);
        ledger.charge(Category::Gemm, (qn * p) as u64);
        b += &bt * r.as_matrix();

        r = kernels::tri_multiply(&r_step, &r, ledger)?;
        (bt, x) = coupled_gramian(q_in, &q, ledger)?;
        profile.push(y);
    }

    Ok(UpdateBlocks {
        q,
        b,
        r,
        shifts,
        profile,
    })
}
