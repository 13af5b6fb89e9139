//! Column-panel scheme built from repeated updates.

use crate::flops::FlopLedger;
use crate::varray::{UpperTriangular, VectorArray};

use super::update::update_blocks;
use super::{ensure_nonempty, AlgoConfig, QrError, QrResult};

/// Widths of `r` contiguous panels covering `n` columns. The first `n mod r`
/// panels get one extra column.
pub fn panel_widths(n: usize, r: usize) -> Result<Vec<usize>, QrError> {
    if r == 0 || r > n {
        return Err(QrError::InvalidPanels { r, n });
    }
    let (base, extra) = (n / r, n % r);
    Ok((0..r).map(|i| base + usize::from(i < extra)).collect())
}

/// QR of `a` by splitting its columns into `r` panels and folding
/// [`chol_qr_update`](super::chol_qr_update) over them, starting from the
/// empty decomposition.
pub fn pn_chol_qr<V: VectorArray>(
    a: &V,
    r: usize,
    cfg: &AlgoConfig,
    ledger: &mut FlopLedger,
) -> Result<QrResult<V>, QrError> {
    cfg.validate()?;
    ensure_nonempty(a)?;
    let widths = panel_widths(a.len(), r)?;

    let mut q = V::zeros(a.space(), 0);
    let mut r_acc = UpperTriangular::empty();
    let mut shifts = Vec::new();
    let mut profiles = Vec::with_capacity(widths.len());
    let mut start = 0;
    for (index, &w) in widths.iter().enumerate() {
        let annotate = |e: QrError| QrError::Panel {
            index,
            source: Box::new(e),
        };
        let panel = a
            .copy_columns(start..start + w)
            .map_err(|e| annotate(e.into()))?;
        let blocks = update_blocks(&q, panel, cfg, ledger).map_err(annotate)?;
        r_acc = UpperTriangular::assemble(&r_acc, &blocks.b, &blocks.r)
            .map_err(|e| annotate(e.into()))?;
        q.append(&blocks.q).map_err(|e| annotate(e.into()))?;
        shifts.extend(blocks.shifts);
        profiles.push(blocks.profile);
        start += w;
    }

    Ok(QrResult {
        q,
        r: r_acc,
        iterations: profiles.iter().map(|p| p.outer()).sum(),
        shifts_applied: shifts,
        profiles,
        dropped: Vec::new(),
    })
}
