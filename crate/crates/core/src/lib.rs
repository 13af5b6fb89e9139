//! Iterated and shifted Cholesky QR orthogonalization for tall matrices that
//! are only accessible column-block-wise, with flop accounting and test
//! matrix generation.

pub mod algorithms;
pub mod flops;
pub mod kernels;
pub mod matgen;
pub mod metrics;
pub mod varray;

pub use algorithms::{
    AlgoConfig, Orthogonalizer, QrError, QrResult, Registry, ShiftWidth, Tolerance, UpdateResult,
};
pub use flops::{Category, FlopLedger, IterationProfile};
pub use varray::{DenseArray, ListArray, SmallDense, UpperTriangular, VectorArray, VectorSpace};
