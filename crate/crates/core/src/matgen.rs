//! Test matrices `A = U diag(sigma) V` with a prescribed condition number.
//!
//! `U` (m x n) and `V` (n x n) are Haar-distributed orthogonal factors and
//! the singular values are log-equidistant between `10^log10_cond` and 1.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::varray::{ArrayError, SmallDense, VectorArray, VectorSpace};

/// Name of the generator behind [`generate`], for metadata records.
pub const PRNG_NAME: &str = "ChaCha8";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatgenError {
    #[error("need rows >= cols >= 1, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("log10 condition number must be finite and nonnegative, got {0}")]
    BadCondition(f64),
    #[error(transparent)]
    Array(#[from] ArrayError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub m: usize,
    pub n: usize,
    pub log10_cond: f64,
    pub seed: u64,
}

impl MatrixSpec {
    pub fn validate(&self) -> Result<(), MatgenError> {
        if self.n == 0 || self.m < self.n {
            return Err(MatgenError::BadShape {
                rows: self.m,
                cols: self.n,
            });
        }
        if !(self.log10_cond.is_finite() && self.log10_cond >= 0.0) {
            return Err(MatgenError::BadCondition(self.log10_cond));
        }
        Ok(())
    }

    /// `seed ^ mix(m, n, round(10 * log10_cond))`, where `mix` chains the
    /// SplitMix64 finalizer over the three values.
    pub fn effective_seed(&self) -> u64 {
        let cond_tag = (10.0 * self.log10_cond).round() as u64;
        let h = splitmix64(self.m as u64);
        let h = splitmix64(h ^ self.n as u64);
        let h = splitmix64(h ^ cond_tag);
        self.seed ^ h
    }

    /// Descending singular values `10^(log10_cond (n - i) / (n - 1))`,
    /// `i = 1..n`.
    pub fn singular_values(&self) -> Vec<f64> {
        let n = self.n;
        if n == 1 {
            return vec![1.0];
        }
        (1..=n)
            .map(|i| 10f64.powf(self.log10_cond * (n - i) as f64 / (n - 1) as f64))
            .collect()
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Orthonormal `rows x cols` factor from the QR decomposition of a Gaussian
/// matrix, with signs fixed so that `R` has a positive diagonal.
pub fn random_orthogonal(
    rows: usize,
    cols: usize,
    rng: &mut impl Rng,
) -> Result<SmallDense, MatgenError> {
    if cols == 0 || rows < cols {
        return Err(MatgenError::BadShape { rows, cols });
    }
    let values: Vec<f64> = (0..rows * cols)
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let qr = DMatrix::from_vec(rows, cols, values).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

/// A generated matrix with the singular values it was built from.
#[derive(Debug, Clone)]
pub struct Generated<V> {
    pub a: V,
    pub singular_values: Vec<f64>,
    pub effective_seed: u64,
}

/// Dense form of the test matrix.
pub fn generate_dense(spec: &MatrixSpec) -> Result<(SmallDense, Vec<f64>), MatgenError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.effective_seed());
    let u = random_orthogonal(spec.m, spec.n, &mut rng)?;
    let v = random_orthogonal(spec.n, spec.n, &mut rng)?;
    let sigma = spec.singular_values();
    let mut sv = v;
    for (i, s) in sigma.iter().enumerate() {
        sv.row_mut(i).scale_mut(*s);
    }
    Ok((u * sv, sigma))
}

pub fn generate<V: VectorArray>(spec: &MatrixSpec) -> Result<Generated<V>, MatgenError> {
    let (a, singular_values) = generate_dense(spec)?;
    let space = VectorSpace::new(spec.m)?;
    Ok(Generated {
        a: V::from_columns(space, a.as_slice().chunks(spec.m))?,
        singular_values,
        effective_seed: spec.effective_seed(),
    })
}
