//! Chi-Square graph wavelets and heterogeneous graph anomaly detection.
//!
//! The crate is organised bottom-up:
//!
//! - [`sparse`]: CSR matrices used for adjacencies and shift operators.
//! - [`hin`]: the heterogeneous graph model, meta-paths and homogenization.
//! - [`spectral`]: the Chi-Square filter family, polynomial fitting,
//!   spectral profiling, filter assignment and fusion.
//! - [`ad`]: a small reverse-mode tape over dense matrices.
//! - [`model`]: the ChiGAD network and the homogeneous ChiGNN variant.
//! - [`train`]: contribution-informed loss, metrics, synthetic data and the
//!   training loop.
//! - [`config`]: run configuration.

pub mod ad;
pub mod config;
pub mod error;
pub mod hin;
pub mod model;
pub mod rng;
pub mod sparse;
pub mod spectral;
pub mod train;

pub use error::{Error, Result};
