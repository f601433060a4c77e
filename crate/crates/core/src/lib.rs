//! MIMO radar direction-of-arrival toolkit.
//!
//! A small co-located MIMO array (the "low" setup) is mapped onto the
//! virtual snapshots of a larger array (the "high" setup) by a fully
//! connected network trained from scratch. MUSIC is then run on the
//! emulated snapshots. The crate also carries the evaluation machinery:
//! covariance fidelity metrics, the deterministic Cramér–Rao bound, and a
//! harness that sweeps training and testing SNRs.
//!
//! Module map:
//!
//! * [`array`]: ULA steering vectors, the Kronecker virtual array, Swerling II
//!   scenes and snapshot synthesis.
//! * [`doa`]: sample covariance, Hermitian eigensolver, MUSIC and peak picking.
//! * [`nn`]: the emulator network, Adam, min-max scaling and model files.
//! * [`metrics`]: covariance errors and the CRB.
//! * [`harness`]: datasets, sweeps, best-training-SNR grids and CSV output.
//! * [`cli`]: the command-line front end used by the `arrayemu` binary.

// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod cli;
pub mod doa;
pub mod error;
pub mod harness;
mod linalg;
pub mod metrics;
pub mod nn;
pub mod rng;

pub use error::{Error, Result};

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;
