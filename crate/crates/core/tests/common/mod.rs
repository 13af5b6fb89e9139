#![allow(dead_code)]

use cholqr::matgen::{generate, MatrixSpec};
use cholqr::metrics::{cholesky_residual, loss_of_orthogonality, reconstruction_residual};
use cholqr::{AlgoConfig, FlopLedger, QrError, QrResult, VectorArray};

pub fn matrix<V: VectorArray>(m: usize, n: usize, log10_cond: f64, seed: u64) -> V {
    generate::<V>(&MatrixSpec {
        m,
        n,
        log10_cond,
        seed,
    })
    .unwrap()
    .a
}

pub fn run<V: VectorArray>(
    f: fn(&V, &AlgoConfig, &mut FlopLedger) -> Result<QrResult<V>, QrError>,
    a: &V,
) -> Result<QrResult<V>, QrError> {
    f(a, &AlgoConfig::default(), &mut FlopLedger::new())
}

pub struct Quality {
    pub loo: f64,
    pub rrr: f64,
    pub rcr: f64,
}

pub fn quality<V: VectorArray>(a: &V, res: &QrResult<V>) -> Quality {
    let c = res.coefficients();
    Quality {
        loo: loss_of_orthogonality(&res.q),
        rrr: reconstruction_residual(a, &res.q, &c).unwrap(),
        rcr: cholesky_residual(a, &c).unwrap(),
    }
}

/// `sqrt(n) * 1e-13`.
pub fn loo_bound(n: usize) -> f64 {
    (n as f64).sqrt() * 1e-13
}
