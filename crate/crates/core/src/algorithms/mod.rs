//! QR algorithms over [`VectorArray`]s.
//!
//! Every algorithm implements [`Orthogonalizer`] and is registered by name in
//! a [`Registry`], so harnesses can pick one at runtime from a string such as
//! `"rscholqr"` or `"pncholqr:4"`.

mod cholqr;
mod mgs;
mod panel;
mod reference;
mod rscholqr;
mod update;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::flops::{Category, FlopLedger, IterationProfile};
use crate::kernels::{self, CholOutcome, KernelError, UnitRoundoff};
use crate::varray::{ArrayError, DenseArray, SmallDense, UpperTriangular, VectorArray};

pub use cholqr::{chol_qr, chol_qr2, is_chol_qr, s_chol_qr3};
pub use mgs::{mgs, DEFAULT_DROP_TOL};
pub use panel::{panel_widths, pn_chol_qr};
pub use reference::reference_qr;
pub use rscholqr::rs_chol_qr;
pub use update::chol_qr_update;

/// Stopping threshold on `||X - I||_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tolerance {
    Fixed(f64),
    /// `u * sqrt(n)`.
    RoundoffSqrtN,
}

/// Which width enters the first shift of the update algorithm,
/// `11 (m d + d (d + 1)) u ||X||`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftWidth {
    /// `d = q`, the width of the existing basis.
    #[default]
    Existing,
    /// `d = p`, the width of the new block.
    New,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig {
    pub tol: Tolerance,
    pub max_iter: usize,
    pub shift_escalation: f64,
    pub max_shift_attempts: usize,
    pub u: UnitRoundoff,
    pub shift_width: ShiftWidth,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            tol: Tolerance::Fixed(1e-13),
            max_iter: 10,
            shift_escalation: 10.0,
            max_shift_attempts: 60,
            u: UnitRoundoff::default(),
            shift_width: ShiftWidth::Existing,
        }
    }
}

impl AlgoConfig {
    pub fn validate(&self) -> Result<(), QrError> {
        if let Tolerance::Fixed(t) = self.tol {
            if !(t > 0.0) {
                return Err(QrError::InvalidConfig(format!(
                    "tol must be positive, got {t}"
                )));
            }
        }
        if self.max_iter == 0 {
            return Err(QrError::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.shift_escalation > 1.0) {
            return Err(QrError::InvalidConfig(format!(
                "shift_escalation must exceed 1, got {}",
                self.shift_escalation
            )));
        }
        Ok(())
    }

    pub fn threshold(&self, n: usize) -> f64 {
        match self.tol {
            Tolerance::Fixed(t) => t,
            Tolerance::RoundoffSqrtN => self.u.get() * (n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QrError {
    #[error(transparent)]
    Array(#[from] ArrayError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("input has no columns")]
    EmptyInput,
    #[error("cholesky breakdown in pass {pass} at pivot {pivot_index} (value {pivot_value:e})")]
    CholeskyBreakdown {
        pass: usize,
        pivot_index: usize,
        pivot_value: f64,
    },
    #[error("no convergence after {iterations} iterations (||X - I||_F = {residual:e})")]
    IterationLimitExceeded { iterations: usize, residual: f64 },
    #[error(
        "shifted cholesky still breaks down after {attempts} shifts (last shift {last_shift:e})"
    )]
    ShiftAttemptLimitExceeded { attempts: usize, last_shift: f64 },
    #[error("panel {index}: {source}")]
    Panel {
        index: usize,
        #[source]
        source: Box<QrError>,
    },
    #[error("panel count {r} must lie in 1..={n}")]
    InvalidPanels { r: usize, n: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least as many rows as columns, got {m}x{n}")]
    TooFewRows { m: usize, n: usize },
}

impl QrError {
    /// Innermost error, looking through panel annotations.
    pub fn root(&self) -> &QrError {
        match self {
            QrError::Panel { source, .. } => source.root(),
            other => other,
        }
    }
}

/// A computed factorization `A = Q R`.
#[derive(Debug, Clone)]
pub struct QrResult<V> {
    pub q: V,
    pub r: UpperTriangular,
    /// Outer iterations (summed over panels for the panel scheme).
    pub iterations: usize,
    /// Every shift that was tried, in order.
    pub shifts_applied: Vec<f64>,
    /// Loop structure, one entry per panel (a single entry otherwise).
    pub profiles: Vec<IterationProfile>,
    /// Input columns dropped as linearly dependent, ascending.
    pub dropped: Vec<usize>,
}

impl<V: VectorArray> QrResult<V> {
    /// Coefficients mapping `q` to the input columns: `r` with zero columns
    /// inserted where inputs were dropped.
    pub fn coefficients(&self) -> SmallDense {
        let k = self.r.n();
        let n = k + self.dropped.len();
        if self.dropped.is_empty() {
            return self.r.as_matrix().clone();
        }
        let mut out = SmallDense::zeros(k, n);
        let mut kept = 0;
        for j in 0..n {
            if self.dropped.binary_search(&j).is_ok() {
                continue;
            }
            out.set_column(j, &self.r.as_matrix().column(kept));
            kept += 1;
        }
        out
    }
}

/// Result of extending an existing factorization by new columns.
#[derive(Debug, Clone)]
pub struct UpdateResult<V> {
    pub q_out: V,
    pub r_out: UpperTriangular,
    pub iterations: usize,
    pub shifts_applied: Vec<f64>,
    pub profile: IterationProfile,
}

/// A QR strategy selectable by name.
pub trait Orthogonalizer<V: VectorArray>: Send + Sync {
    fn name(&self) -> String;

    fn factorize(
        &self,
        a: &V,
        cfg: &AlgoConfig,
        ledger: &mut FlopLedger,
    ) -> Result<QrResult<V>, QrError>;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("unknown algorithm {0:?}")]
    Unknown(String),
    #[error("bad parameter for {name}: {msg}")]
    BadParameter { name: String, msg: String },
}

type Factory<V> =
    Box<dyn Fn(Option<&str>) -> Result<Box<dyn Orthogonalizer<V>>, RegistryError> + Send + Sync>;

/// Name-to-strategy table. Names may carry a parameter after a colon
/// (`pncholqr:3`).
pub struct Registry<V: VectorArray> {
    factories: BTreeMap<String, Factory<V>>,
}

impl<V: VectorArray + 'static> fmt::Debug for Registry<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("names", &self.names())
            .finish()
    }
}

fn no_param<V: VectorArray, T: Orthogonalizer<V> + 'static>(
    name: &'static str,
    make: fn() -> T,
) -> Factory<V> {
    Box::new(move |param| match param {
        None => Ok(Box::new(make()) as Box<dyn Orthogonalizer<V>>),
        Some(p) => Err(RegistryError::BadParameter {
            name: name.into(),
            msg: format!("takes no parameter, got {p:?}"),
        }),
    })
}

impl<V: VectorArray + 'static> Registry<V> {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    /// All backend-generic algorithms.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register("cholqr", no_param("cholqr", || CholQr));
        reg.register("cholqr2", no_param("cholqr2", || CholQr2));
        reg.register("scholqr3", no_param("scholqr3", || SCholQr3));
        reg.register("ischolqr", no_param("ischolqr", || IsCholQr));
        reg.register("rscholqr", no_param("rscholqr", || RsCholQr));
        reg.register(
            "pncholqr",
            Box::new(|param| {
                let r = param
                    .ok_or_else(|| RegistryError::BadParameter {
                        name: "pncholqr".into(),
                        msg: "panel count required, e.g. pncholqr:4".into(),
                    })?
                    .parse::<usize>()
                    .ok()
                    .filter(|&r| r > 0)
                    .ok_or_else(|| RegistryError::BadParameter {
                        name: "pncholqr".into(),
                        msg: "panel count must be a positive integer".into(),
                    })?;
                Ok(Box::new(PnCholQr { panels: r }) as Box<dyn Orthogonalizer<V>>)
            }),
        );
        reg.register(
            "mgs",
            Box::new(|param| {
                let drop_tol = match param {
                    None => DEFAULT_DROP_TOL,
                    Some(p) => p.parse::<f64>().ok().filter(|t| *t >= 0.0).ok_or_else(|| {
                        RegistryError::BadParameter {
                            name: "mgs".into(),
                            msg: format!("drop tolerance must be a nonnegative number, got {p:?}"),
                        }
                    })?,
                };
                Ok(Box::new(Mgs { drop_tol }) as Box<dyn Orthogonalizer<V>>)
            }),
        );
        reg
    }

    pub fn register(&mut self, name: impl Into<String>, factory: Factory<V>) {
        self.factories.insert(name.into(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    /// Looks up `name` or `name:param`.
    pub fn get(&self, spec: &str) -> Result<Box<dyn Orthogonalizer<V>>, RegistryError> {
        let (base, param) = match spec.split_once(':') {
            Some((b, p)) => (b, Some(p)),
            None => (spec, None),
        };
        let factory = self
            .factories
            .get(base)
            .ok_or_else(|| RegistryError::Unknown(spec.to_string()))?;
        factory(param)
    }
}

impl Registry<DenseArray> {
    /// Builtins plus the Householder reference, which needs entry access.
    pub fn dense() -> Self {
        let mut reg = Self::builtin();
        reg.register("reference", no_param("reference", || ReferenceQr));
        reg
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CholQr;
#[derive(Debug, Clone, Copy)]
pub struct CholQr2;
#[derive(Debug, Clone, Copy)]
pub struct SCholQr3;
#[derive(Debug, Clone, Copy)]
pub struct IsCholQr;
#[derive(Debug, Clone, Copy)]
pub struct RsCholQr;
#[derive(Debug, Clone, Copy)]
pub struct PnCholQr {
    pub panels: usize,
}
#[derive(Debug, Clone, Copy)]
pub struct Mgs {
    pub drop_tol: f64,
}
#[derive(Debug, Clone, Copy)]
pub struct ReferenceQr;

macro_rules! generic_strategy {
    ($ty:ty, $name:literal, $run:path) => {
        impl<V: VectorArray> Orthogonalizer<V> for $ty {
            fn name(&self) -> String {
                $name.into()
            }

            fn factorize(
                &self,
                a: &V,
                cfg: &AlgoConfig,
                ledger: &mut FlopLedger,
            ) -> Result<QrResult<V>, QrError> {
                $run(a, cfg, ledger)
            }
        }
    };
}

generic_strategy!(CholQr, "cholqr", chol_qr);
generic_strategy!(CholQr2, "cholqr2", chol_qr2);
generic_strategy!(SCholQr3, "scholqr3", s_chol_qr3);
generic_strategy!(IsCholQr, "ischolqr", is_chol_qr);
generic_strategy!(RsCholQr, "rscholqr", rs_chol_qr);

impl<V: VectorArray> Orthogonalizer<V> for PnCholQr {
    fn name(&self) -> String {
        format!("pncholqr:{}", self.panels)
    }

    fn factorize(
        &self,
        a: &V,
        cfg: &AlgoConfig,
        ledger: &mut FlopLedger,
    ) -> Result<QrResult<V>, QrError> {
        pn_chol_qr(a, self.panels, cfg, ledger)
    }
}

impl<V: VectorArray> Orthogonalizer<V> for Mgs {
    fn name(&self) -> String {
        "mgs".into()
    }

    fn factorize(
        &self,
        a: &V,
        cfg: &AlgoConfig,
        ledger: &mut FlopLedger,
    ) -> Result<QrResult<V>, QrError> {
        mgs(a, cfg, self.drop_tol, ledger)
    }
}

impl Orthogonalizer<DenseArray> for ReferenceQr {
    fn name(&self) -> String {
        "reference".into()
    }

    fn factorize(
        &self,
        a: &DenseArray,
        _cfg: &AlgoConfig,
        _ledger: &mut FlopLedger,
    ) -> Result<QrResult<DenseArray>, QrError> {
        if a.is_empty() {
            return Err(QrError::EmptyInput);
        }
        let (q, r) = reference_qr(&a.to_matrix())?;
        Ok(QrResult {
            q: DenseArray::from_matrix(q)?,
            r,
            iterations: 0,
            shifts_applied: Vec::new(),
            profiles: Vec::new(),
            dropped: Vec::new(),
        })
    }
}

// Shared building blocks. They charge the ledger the way the flop tables do.

fn ensure_nonempty<V: VectorArray>(a: &V) -> Result<(), QrError> {
    if a.is_empty() {
        return Err(QrError::EmptyInput);
    }
    Ok(())
}

/// `Q^T Q`, symmetrized.
fn gram<V: VectorArray>(q: &V, ledger: &mut FlopLedger) -> SmallDense {
    ledger.gemm(q.len(), q.dim(), q.len());
    q.self_gramian()
}

/// `Q R^{-1}` through an explicit triangular inverse and a linear combination.
fn apply_inverse<V: VectorArray>(
    q: &V,
    r: &UpperTriangular,
    ledger: &mut FlopLedger,
) -> Result<V, QrError> {
    let inv = kernels::tri_inverse(r, ledger)?;
    ledger.gemm(q.dim(), q.len(), q.len());
    Ok(q.lincomb(inv.as_matrix())?)
}

/// `||X - I||_F`.
fn orthogonality_residual(x: &SmallDense, ledger: &mut FlopLedger) -> f64 {
    let n = x.nrows();
    kernels::frobenius(&(x - SmallDense::identity(n, n)), ledger)
}

/// Cholesky of `X + sigma I`; the diagonal shift costs `n` flops.
fn shifted_cholesky(
    x: &SmallDense,
    sigma: f64,
    ledger: &mut FlopLedger,
) -> Result<CholOutcome, QrError> {
    ledger.charge(Category::Potrf, x.nrows() as u64);
    Ok(kernels::cholesky(&kernels::add_shift(x, sigma), ledger)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::varray::{ListArray, VectorSpace};

    #[test]
    fn registry_resolves_names_and_parameters() {
        let reg = Registry::<ListArray>::builtin();
        assert_eq!(
            reg.names(),
            vec!["cholqr", "cholqr2", "ischolqr", "mgs", "pncholqr", "rscholqr", "scholqr3"]
        );
        assert_eq!(reg.get("pncholqr:3").unwrap().name(), "pncholqr:3");
        assert!(matches!(
            reg.get("pncholqr"),
            Err(RegistryError::BadParameter { .. })
        ));
        assert!(matches!(
            reg.get("pncholqr:0"),
            Err(RegistryError::BadParameter { .. })
        ));
        assert!(matches!(
            reg.get("rscholqr:2"),
            Err(RegistryError::BadParameter { .. })
        ));
        assert!(matches!(
            reg.get("householder"),
            Err(RegistryError::Unknown(_))
        ));
        assert!(matches!(
            reg.get("reference"),
            Err(RegistryError::Unknown(_))
        ));
        assert!(Registry::<DenseArray>::dense().get("reference").is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(AlgoConfig::default().validate().is_ok());
        let bad = AlgoConfig {
            max_iter: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AlgoConfig {
            shift_escalation: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = AlgoConfig {
            tol: Tolerance::Fixed(0.0),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let c = AlgoConfig {
            tol: Tolerance::RoundoffSqrtN,
            ..Default::default()
        };
        assert_eq!(c.threshold(4), 2.0 * c.u.get());
    }

    #[test]
    fn coefficients_insert_zero_columns_for_drops() {
        let res = QrResult {
            q: ListArray::zeros(VectorSpace::new(3).unwrap(), 2),
            r: UpperTriangular::from_diagonal(&[2.0, 3.0]),
            iterations: 0,
            shifts_applied: vec![],
            profiles: vec![],
            dropped: vec![1],
        };
        let c = res.coefficients();
        assert_eq!(c.shape(), (2, 3));
        assert_eq!(c.column(1).amax(), 0.0);
        assert_eq!(c[(1, 2)], 3.0);
    }

    #[test]
    fn panel_error_root() {
        let e = QrError::Panel {
            index: 2,
            source: Box::new(QrError::EmptyInput),
        };
        assert_eq!(e.root(), &QrError::EmptyInput);
    }
}
