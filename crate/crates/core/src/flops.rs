//! Flop accounting.
//!
//! Work is counted per routine category (`gemm`, `trmm`, `potrf`, `trtri`,
//! Frobenius norm, largest-eigenvalue estimate) using the standard LAPACK
//! operation counts. Algorithms charge a [`FlopLedger`] that is passed to them
//! explicitly; the `predict_*` functions give the same numbers in closed form
//! so the two can be compared as exact integers.
//!
//! The closed forms assume a failed Cholesky attempt costs a full
//! factorization and that the spectral-norm estimate costs `38n^2 + 1520n`,
//! which is the Lanczos cost with 20 basis vectors.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Gemm,
    Trmm,
    Potrf,
    Trtri,
    FroNorm,
    EigEst,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Gemm,
        Category::Trmm,
        Category::Potrf,
        Category::Trtri,
        Category::FroNorm,
        Category::EigEst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Gemm => "gemm",
            Category::Trmm => "trmm",
            Category::Potrf => "potrf",
            Category::Trtri => "trtri",
            Category::FroNorm => "fro_norm",
            Category::EigEst => "eig_est",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-category operation counters. Counters only ever grow.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlopLedger {
    counts: [u64; 6],
}

impl FlopLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, cat: Category, flops: u64) {
        self.counts[cat.index()] += flops;
    }

    /// `2 * i * j * k` for an `(i x j) * (j x k)` product.
    pub fn gemm(&mut self, i: usize, j: usize, k: usize) {
        self.charge(Category::Gemm, 2 * (i as u64) * (j as u64) * (k as u64));
    }

    pub fn get(&self, cat: Category) -> u64 {
        self.counts[cat.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn merge(&mut self, other: &FlopLedger) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Category, u64)> + '_ {
        Category::ALL.iter().map(move |&c| (c, self.get(c)))
    }
}

/// Loop structure of one run: `x` outer iterations, and for each the number of
/// shift attempts made after the first Cholesky attempt broke down.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationProfile {
    pub shift_attempts: Vec<usize>,
}

impl IterationProfile {
    /// Every one of `x` iterations needed exactly `y` shift attempts.
    pub fn uniform(x: usize, y: usize) -> Self {
        Self {
            shift_attempts: vec![y; x],
        }
    }

    pub fn outer(&self) -> usize {
        self.shift_attempts.len()
    }

    pub fn total_shift_attempts(&self) -> usize {
        self.shift_attempts.iter().sum()
    }

    pub(crate) fn push(&mut self, y: usize) {
        self.shift_attempts.push(y);
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FlopError {
    #[error("closed form needs the panel count {r} to divide n = {n}")]
    FormulaInapplicable { n: usize, r: usize },
}

pub fn potrf_flops(n: usize) -> u64 {
    let n = n as u64;
    n * (n + 1) * (2 * n + 1) / 6
}

pub fn trtri_flops(n: usize) -> u64 {
    let n = n as u64;
    n * (n * n + 2) / 3
}

pub fn trmm_flops(n: usize) -> u64 {
    (n as u64).pow(3)
}

pub fn fro_flops(n: usize) -> u64 {
    let n = n as u64;
    2 * n * n + n
}

pub fn eig_est_flops(n: usize) -> u64 {
    let n = n as u64;
    38 * n * n + 1520 * n
}

/// Iterated shifted Cholesky QR, per category, for an observed profile.
pub fn rscholqr_ledger(m: usize, n: usize, profile: &IterationProfile) -> FlopLedger {
    let (mu, nu) = (m as u64, n as u64);
    let x = profile.outer() as u64;
    let mut l = FlopLedger::new();
    l.charge(Category::Gemm, 2 * mu * nu * nu + x * 4 * mu * nu * nu);
    l.charge(Category::FroNorm, (x + 1) * fro_flops(n));
    let mut potrf = x * potrf_flops(n);
    let mut eig = 0;
    for &y in &profile.shift_attempts {
        let y = y as u64;
        potrf += y * (potrf_flops(n) + nu);
        if y > 0 {
            eig += eig_est_flops(n) + y - 1;
        }
    }
    l.charge(Category::Potrf, potrf);
    l.charge(Category::EigEst, eig);
    l.charge(Category::Trtri, x * trtri_flops(n));
    l.charge(Category::Trmm, x * trmm_flops(n));
    l
}

/// Total for the iterated shifted Cholesky QR when every one of the `x`
/// iterations breaks down once and is shifted.
pub fn predict_rscholqr(m: usize, n: usize, x: usize) -> u64 {
    rscholqr_ledger(m, n, &IterationProfile::uniform(x, 1)).total()
}

/// Cholesky QR update of `q` existing by `p` new columns, per category.
pub fn update_ledger(m: usize, q: usize, p: usize, profile: &IterationProfile) -> FlopLedger {
    let (m, q, p) = (m as u64, q as u64, p as u64);
    let x = profile.outer() as u64;
    let mut l = FlopLedger::new();
    let gram = 2 * m * p * p + 2 * q * p * p + p * p;
    let once = 2 * m * q * p + gram;
    let per_iter = (2 * m * p * p + 2 * m * q * p + m * p) // (Q - Q_in B) R^-1
        + (2 * q * p * p + q * p) // B + B R
        + 2 * m * q * p // Q_in^T Q
        + gram;
    l.charge(Category::Gemm, once + x * per_iter);
    l.charge(Category::FroNorm, (x + 1) * fro_flops(p as usize));
    let mut potrf = 0;
    let mut eig = 0;
    for &y in &profile.shift_attempts {
        let y = y as u64;
        potrf += (y + 1) * (potrf_flops(p as usize) + p);
        if y > 0 {
            eig += eig_est_flops(p as usize) + y - 1;
        }
    }
    l.charge(Category::Potrf, potrf);
    l.charge(Category::EigEst, eig);
    l.charge(Category::Trtri, x * trtri_flops(p as usize));
    l.charge(Category::Trmm, x * trmm_flops(p as usize));
    l
}

pub fn predict_update(m: usize, q: usize, p: usize, profile: &IterationProfile) -> u64 {
    update_ledger(m, q, p, profile).total()
}

/// Panel scheme as a sum of updates with the observed per-panel profiles.
pub fn panel_ledger(m: usize, widths: &[usize], profiles: &[IterationProfile]) -> FlopLedger {
    let mut l = FlopLedger::new();
    let mut q = 0;
    for (&p, prof) in widths.iter().zip(profiles) {
        l.merge(&update_ledger(m, q, p, prof));
        q += p;
    }
    l
}

/// Closed-form panel-scheme total for `r` equal panels, every update taking
/// `x` outer iterations with `y` shift attempts each.
pub fn predict_panel(m: usize, n: usize, r: usize, x: usize, y: usize) -> Result<u64, FlopError> {
    if r == 0 || r > n || !n.is_multiple_of(r) {
        return Err(FlopError::FormulaInapplicable { n, r });
    }
    let (m, n, r, x, y) = (m as i128, n as i128, r as i128, x as i128, y as i128);
    let p = n / r;
    // Everything below is six times the closed form, written with p = n / r
    // so that each term is an integer.
    let first = 6 * (m * n * n + m * n * p + n * n * p - n * p * p + 3 * n * p + n);
    let eig = 6 * (38 * n * p + 1520 * n);
    let outer = 12 * m * n * n + 12 * m * n * p + 6 * m * n + 12 * n * n * p - 2 * n * p * p
        + 3 * n * n
        + 18 * n * p
        + eig
        + 17 * n
        - 6 * r;
    let inner = 2 * n * p * p + 3 * n * p + 7 * n + 6 * r;
    let six_total = first + x * outer + x * y * inner;
    debug_assert_eq!(six_total % 6, 0);
    Ok((six_total / 6) as u64)
}

/// Predicted panel-to-iterated flop ratio for the leading `m` terms.
pub fn ratio_table(n: usize, r: usize, x: usize) -> f64 {
    let (n, r, x) = (n as f64, r as f64, x as f64);
    0.5 + 1.0 / (2.0 * r) + x / (4.0 * n * x + 2.0 * n)
}

/// Limit of [`ratio_table`] for large `n`.
pub fn ratio_limit(r: usize) -> f64 {
    0.5 + 1.0 / (2.0 * r as f64)
}

/// Measured vs predicted counts for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerReport {
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportRow {
    pub category: Category,
    pub measured: u64,
    pub predicted: u64,
}

impl ReportRow {
    pub fn matches(&self) -> bool {
        self.measured == self.predicted
    }
}

impl LedgerReport {
    pub fn compare(measured: &FlopLedger, predicted: &FlopLedger) -> Self {
        Self {
            rows: Category::ALL
                .iter()
                .map(|&c| ReportRow {
                    category: c,
                    measured: measured.get(c),
                    predicted: predicted.get(c),
                })
                .collect(),
        }
    }

    pub fn mismatches(&self) -> Vec<Category> {
        self.rows
            .iter()
            .filter(|r| !r.matches())
            .map(|r| r.category)
            .collect()
    }

    pub fn all_match(&self) -> bool {
        self.mismatches().is_empty()
    }

    pub fn measured_total(&self) -> u64 {
        self.rows.iter().map(|r| r.measured).sum()
    }

    pub fn predicted_total(&self) -> u64 {
        self.rows.iter().map(|r| r.predicted).sum()
    }
}
